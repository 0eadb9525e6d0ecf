"""Module-lattice undeniable signatures: trapdoor signing plus interactive
confirmation and disavowal of the message token."""

from .params import ParamSet, load_paramset, theoretical_sizes
from .gaussian import make_rng
from .scheme import PublicKey, SecretKey, Signature, VerifyResult, ml_keygen, ml_sign, verify_static
from .protocol import (HonestProver, ProtocolVerdict, SignerEndpoint, Verdict, VerifierEndpoint,
                       run_protocol)

__version__ = "0.1.0"

__all__ = [
    "ParamSet", "load_paramset", "theoretical_sizes", "make_rng",
    "PublicKey", "SecretKey", "Signature", "VerifyResult", "ml_keygen", "ml_sign", "verify_static",
    "HonestProver", "ProtocolVerdict", "SignerEndpoint", "Verdict", "VerifierEndpoint", "run_protocol",
]
