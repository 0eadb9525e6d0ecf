"""Interactive confirmation / disavowal of the sigma3 token.

One round:
  signer   picks e uniform in R_q^k and a coordinate permutation phi, sets
           j = M(v + e) - sigma3, and commits to
             comm1 = C(phi || (L + M) e),  comm2 = C(phi(e)),  comm3 = C(phi(v + e))
  verifier sends ch in {0, 1, 2}
  signer   opens two of the three commitments
             ch=0: phi(v), phi(e)       ch=1: phi, v + e, j       ch=2: phi, e
  verifier checks the openings. For ch=1 the gate M(v + e) - j = sigma3 must
           hold, and comm1 is compared against C(phi || (L + M)(v + e) - H - sigma3):
           a match is confirmation evidence, a mismatch disavowal evidence.

For ch=0 the verifier also bounds ||phi(v)|| by t beta sqrt(kn). Without it a
prover holding any (non-short) solution of (L + M) v' = H + sigma3 would pass all
three challenges.

With j = M(v + e) - sigma3 the gate holds for any sigma3, so an honest signer
can disavow an invalid token. A signer that computes j this way from another
short v' also passes the gate, which means disavowal of a *valid* token by such
a signer is not prevented (see README).

Sessions run over a request/response channel: every verifier frame
(INIT, CHALLENGE, NEXT, DONE) gets exactly one signer frame back
(COMMIT, RESPONSE, COMMIT, ACK, or ERROR).
"""

from __future__ import annotations

import socket
import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Protocol

import numpy as np

from . import codec
from .codec import FrameType, Reader
from .gaussian import RandomStream, sample_ring_vector
from .hashing import COMMIT_BYTES, NONCE_BYTES, commit, transcript_challenge
from .params import ParamSet
from .ring import euclidean_norm, get_ring
from .scheme import PublicKey, SecretKey, Signature, message_matrix, verify_static

ZERO_NONCE = bytes(NONCE_BYTES)
FLAG_ZERO_NONCES = 0x01


class ProtocolError(Exception):
    pass


class ProtocolViolation(ProtocolError):
    pass


class TransportError(ProtocolError):
    pass


class RoundAlreadyAnswered(ProtocolError):
    pass


class Abort(ProtocolError):
    """Simulator hit the challenge it could not answer."""


# -- values --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Permutation:
    """phi(x)_i = x_{perm[i]}, acting on the k ring coordinates of a vector."""
    perm: np.ndarray

    @classmethod
    def random(cls, k: int, rng: RandomStream) -> "Permutation":
        return cls(rng.permutation(k))

    def apply(self, x) -> np.ndarray:
        return np.asarray(x)[..., self.perm, :]

    def inverse(self) -> "Permutation":
        return Permutation(np.argsort(self.perm))

    def to_bytes(self) -> bytes:
        return codec.encode_permutation(self.perm)

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.perm, other.perm)


@dataclass(frozen=True)
class RoundCommitments:
    comm1: bytes
    comm2: bytes
    comm3: bytes

    def to_bytes(self) -> bytes:
        return self.comm1 + self.comm2 + self.comm3

    @classmethod
    def read(cls, r: Reader) -> "RoundCommitments":
        return cls(r.take(COMMIT_BYTES), r.take(COMMIT_BYTES), r.take(COMMIT_BYTES))


@dataclass
class RoundResponse:
    ch: int
    perm: Permutation | None = None
    phi_v: np.ndarray | None = None
    phi_e: np.ndarray | None = None
    v_plus_e: np.ndarray | None = None
    j: np.ndarray | None = None
    e: np.ndarray | None = None
    nonce1: bytes | None = None
    nonce2: bytes | None = None
    nonce3: bytes | None = None

    def to_bytes(self, p: ParamSet) -> bytes:
        q = p.q
        out = bytes([self.ch])
        if self.ch == 0:
            out += codec.encode_short_modq(self.phi_v, q) + codec.encode_modq(self.phi_e, q)
            out += self.nonce2 + self.nonce3
        elif self.ch == 1:
            out += self.perm.to_bytes() + codec.encode_modq(self.v_plus_e, q) + codec.encode_modq(self.j, q)
            out += self.nonce1 + self.nonce3
        elif self.ch == 2:
            out += self.perm.to_bytes() + codec.encode_modq(self.e, q) + self.nonce1 + self.nonce2
        else:
            raise codec.RangeOverflow(f"challenge {self.ch}")
        return out

    @classmethod
    def read(cls, r: Reader, p: ParamSet) -> "RoundResponse":
        q, vec = p.q, (p.k, p.n)
        ch = r.u8()
        if ch == 0:
            phi_v = codec.decode_short_modq(r, vec, q)
            phi_e = codec.decode_modq(r, vec, q)
            return cls(0, phi_v=phi_v, phi_e=phi_e, nonce2=r.take(NONCE_BYTES), nonce3=r.take(NONCE_BYTES))
        if ch == 1:
            perm = Permutation(codec.decode_permutation(r, p.k))
            ve = codec.decode_modq(r, vec, q)
            j = codec.decode_modq(r, (p.l, p.n), q)
            return cls(1, perm=perm, v_plus_e=ve, j=j, nonce1=r.take(NONCE_BYTES), nonce3=r.take(NONCE_BYTES))
        if ch == 2:
            perm = Permutation(codec.decode_permutation(r, p.k))
            e = codec.decode_modq(r, vec, q)
            return cls(2, perm=perm, e=e, nonce1=r.take(NONCE_BYTES), nonce2=r.take(NONCE_BYTES))
        raise codec.NonCanonical(f"challenge byte {ch}")


@dataclass
class RoundState:
    """Signer-side secrets of one round. Never serialised."""
    e: np.ndarray
    perm: Permutation
    j: np.ndarray
    witness: np.ndarray          # the short vector the commitments were built from
    nonces: tuple[bytes, bytes, bytes]
    comms: RoundCommitments
    answered: bool = False


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    evidence: str | None = None    # "confirm" / "disavow" for ch=1
    reason: str | None = None

    def __bool__(self):
        return self.ok


class Verdict(Enum):
    CONFIRMED = "Confirmed"
    DISAVOWED = "Disavowed"
    REJECTED = "Rejected"


@dataclass
class RoundRecord:
    round: int
    ch: int
    ok: bool
    evidence: str | None
    reason: str | None


@dataclass
class ProtocolVerdict:
    kind: Verdict
    round: int | None = None
    reason: str | None = None
    rounds_run: int = 0
    confirms: int = 0
    disavows: int = 0
    records: list = field(default_factory=list, repr=False)

    @property
    def name(self) -> str:
        return self.kind.value

    def to_dict(self) -> dict:
        return {"verdict": self.kind.value, "round": self.round, "reason": self.reason,
                "rounds_run": self.rounds_run, "confirm_rounds": self.confirms,
                "disavow_rounds": self.disavows}


# -- public statement ----------------------------------------------------------

class Statement:
    """Everything both parties derive from (pk, msg, sigma3)."""

    def __init__(self, pk: PublicKey, msg: bytes, sigma3, p: ParamSet, M=None):
        self.p = p
        self.ring = get_ring(p.q, p.n)
        self.msg = bytes(msg)
        self.L = pk.L
        self.H = np.asarray(pk.H) % p.q
        self.M = message_matrix(msg, p) if M is None else M
        self.sigma3 = np.asarray(sigma3) % p.q
        self.LM = (self.L + self.M) % p.q
        self.M_hat = self.ring.ntt(self.M)
        self.LM_hat = self.ring.ntt(self.LM)

    @classmethod
    def from_parts(cls, sigma3, L, M, H, p: ParamSet) -> "Statement":
        st = cls.__new__(cls)
        st.p, st.ring, st.msg = p, get_ring(p.q, p.n), b""
        st.L, st.M, st.H = np.asarray(L) % p.q, np.asarray(M) % p.q, np.asarray(H) % p.q
        st.sigma3 = np.asarray(sigma3) % p.q
        st.LM = (st.L + st.M) % p.q
        st.M_hat, st.LM_hat = st.ring.ntt(st.M), st.ring.ntt(st.LM)
        return st

    def with_sigma3(self, sigma3) -> "Statement":
        st = object.__new__(Statement)
        st.__dict__.update(self.__dict__)
        st.sigma3 = np.asarray(sigma3) % self.p.q
        return st

    def M_times(self, x):
        return self.ring.matvec(self.M, x, self.M_hat)

    def LM_times(self, x):
        return self.ring.matvec(self.LM, x, self.LM_hat)


def comm1_payload(perm: Permutation, y, q: int) -> bytes:
    return perm.to_bytes() + codec.encode_modq(np.asarray(y) % q, q)


def vec_payload(x, q: int) -> bytes:
    return codec.encode_modq(np.asarray(x) % q, q)


def fresh_nonces(rng: RandomStream, zero_nonces: bool = False):
    if zero_nonces:
        return ZERO_NONCE, ZERO_NONCE, ZERO_NONCE
    return rng.bytes(NONCE_BYTES), rng.bytes(NONCE_BYTES), rng.bytes(NONCE_BYTES)


def commit_round(st: Statement, witness, rng: RandomStream, zero_nonces: bool = False,
                 comm1_value=None) -> RoundState:
    """Commitments built from ``witness`` in place of v.

    ``comm1_value`` overrides the committed (L + M) e; only the simulators use it.
    """
    p = st.p
    q = p.q
    e = rng.integers(0, q, (p.k, p.n), dtype=np.int64)
    perm = Permutation.random(p.k, rng)
    ve = (np.asarray(witness) + e) % q
    j = (st.M_times(ve) - st.sigma3) % q
    n1, n2, n3 = fresh_nonces(rng, zero_nonces)
    y = st.LM_times(e) if comm1_value is None else comm1_value
    comms = RoundCommitments(
        commit(comm1_payload(perm, y, q), n1),
        commit(vec_payload(perm.apply(e), q), n2),
        commit(vec_payload(perm.apply(ve), q), n3),
    )
    return RoundState(e, perm, j, np.asarray(witness), (n1, n2, n3), comms)


def open_round(state: RoundState, ch: int, q: int) -> RoundResponse:
    if state.answered:
        raise RoundAlreadyAnswered("this round already received a challenge")
    if ch not in (0, 1, 2):
        raise ProtocolViolation(f"challenge {ch} not in {{0,1,2}}")
    state.answered = True
    n1, n2, n3 = state.nonces
    if ch == 0:
        return RoundResponse(0, phi_v=state.perm.apply(state.witness), phi_e=state.perm.apply(state.e),
                             nonce2=n2, nonce3=n3)
    if ch == 1:
        return RoundResponse(1, perm=state.perm, v_plus_e=(state.witness + state.e) % q, j=state.j,
                             nonce1=n1, nonce3=n3)
    return RoundResponse(2, perm=state.perm, e=state.e, nonce1=n1, nonce2=n2)


# -- the three protocol operations ---------------------------------------------

def signer_commit(sk: SecretKey, pk: PublicKey, msg: bytes, sig: Signature, p: ParamSet,
                  rng: RandomStream, zero_nonces: bool = False,
                  statement: Statement | None = None) -> tuple[RoundState, RoundCommitments]:
    st = statement or Statement(pk, msg, sig.sigma3, p)
    state = commit_round(st, sk.v, rng, zero_nonces)
    return state, state.comms


def verifier_challenge(rng: RandomStream) -> int:
    return int(rng.integers(0, 3))


def signer_respond(state: RoundState, sk: SecretKey, ch: int) -> RoundResponse:
    if not np.array_equal(state.witness, sk.v):
        raise ProtocolViolation("round state does not belong to this key")
    return open_round(state, ch, sk.params.q)


def verifier_check(comms: RoundCommitments, ch: int, resp: RoundResponse, sigma3, L, M, H,
                   p: ParamSet, statement: Statement | None = None) -> CheckResult:
    st = statement if statement is not None else Statement.from_parts(sigma3, L, M, H, p)
    q = p.q
    if resp.ch != ch:
        return CheckResult(False, reason="WrongChallenge")
    try:
        if ch == 0:
            if euclidean_norm(resp.phi_v) > p.secret_bound:
                return CheckResult(False, reason="ShortnessViolation")
            if commit(vec_payload(resp.phi_e, q), resp.nonce2) != comms.comm2:
                return CheckResult(False, reason="Comm2Mismatch")
            if commit(vec_payload(resp.phi_v + resp.phi_e, q), resp.nonce3) != comms.comm3:
                return CheckResult(False, reason="Comm3Mismatch")
            return CheckResult(True)
        if ch == 1:
            ve = np.asarray(resp.v_plus_e) % q
            if not np.array_equal((st.M_times(ve) - resp.j) % q, st.sigma3):
                return CheckResult(False, reason="Sigma3Mismatch")
            if commit(vec_payload(resp.perm.apply(ve), q), resp.nonce3) != comms.comm3:
                return CheckResult(False, reason="Comm3Mismatch")
            y = st.LM_times(ve) - st.H - st.sigma3
            if commit(comm1_payload(resp.perm, y, q), resp.nonce1) == comms.comm1:
                return CheckResult(True, evidence="confirm")
            return CheckResult(True, evidence="disavow")
        if ch == 2:
            if commit(comm1_payload(resp.perm, st.LM_times(resp.e), q), resp.nonce1) != comms.comm1:
                return CheckResult(False, reason="Comm1Mismatch")
            if commit(vec_payload(resp.perm.apply(resp.e), q), resp.nonce2) != comms.comm2:
                return CheckResult(False, reason="Comm2Mismatch")
            return CheckResult(True)
    except (TypeError, ValueError, IndexError, AttributeError) as exc:
        return CheckResult(False, reason=f"MalformedResponse: {exc}")
    return CheckResult(False, reason="BadChallenge")


# -- provers -------------------------------------------------------------------

class Prover(Protocol):
    def commit(self, st: Statement, rng: RandomStream, zero_nonces: bool) -> RoundState: ...
    def respond(self, state: RoundState, ch: int) -> RoundResponse: ...


class HonestProver:
    def __init__(self, sk: SecretKey):
        self.sk = sk

    def commit(self, st, rng, zero_nonces=False):
        return commit_round(st, self.sk.v, rng, zero_nonces)

    def respond(self, state, ch):
        return signer_respond(state, self.sk, ch)


# -- ZK simulator --------------------------------------------------------------

def simulate_commit(st: Statement, guess: int, rng: RandomStream, zero_nonces: bool = False) -> RoundState:
    """Commitments from public data only, answerable for every challenge but ``guess``."""
    p = st.p
    if guess == 0:
        fake = st.ring.center(st.ring.solve_underdetermined(st.LM, (st.H + st.sigma3) % p.q))
        return commit_round(st, fake, rng, zero_nonces)
    fake = sample_ring_vector(p.k, p.beta, p.n, rng, p.t)
    if guess == 1:
        return commit_round(st, fake, rng, zero_nonces)
    if guess == 2:
        # comm1 must be fixed before e is drawn, so draw e first and replay the rest
        state = commit_round(st, fake, rng, zero_nonces)
        z = (fake + state.e) % p.q
        y = st.LM_times(z) - st.H - st.sigma3
        n1 = state.nonces[0]
        comm1 = commit(comm1_payload(state.perm, y, p.q), n1)
        state.comms = RoundCommitments(comm1, state.comms.comm2, state.comms.comm3)
        return state
    raise ValueError("guess must be 0, 1 or 2")


def zk_simulate(pk: PublicKey, msg: bytes, sigma3, guess: int, p: ParamSet, rng: RandomStream,
                ch: int | None = None, zero_nonces: bool = False,
                statement: Statement | None = None):
    """One simulated round; raises Abort when the challenge equals ``guess``."""
    st = statement or Statement(pk, msg, sigma3, p)
    state = simulate_commit(st, guess, rng, zero_nonces)
    if ch is None:
        ch = verifier_challenge(rng)
    if ch == guess:
        raise Abort(f"challenge {ch} equals the simulator's guess")
    return state.comms, ch, open_round(state, ch, p.q)


# -- signer endpoint (frame handler) -------------------------------------------

def _u32(x: int) -> bytes:
    return struct.pack("<I", x)


def encode_init(msg: bytes, sig: Signature, zero_nonces: bool = False) -> bytes:
    flags = FLAG_ZERO_NONCES if zero_nonces else 0
    payload = bytes([flags]) + struct.pack("<Q", len(msg)) + bytes(msg) + sig.payload()
    return codec.encode_frame(FrameType.INIT, sig.params, payload)


def decode_init(frame: codec.Frame, p: ParamSet):
    r = Reader(frame.payload)
    flags = r.u8()
    if flags & ~FLAG_ZERO_NONCES:
        raise codec.NonCanonical("unknown INIT flags")
    msg = r.take(r.u64())
    sig = Signature.from_payload(r.take(len(frame.payload) - r.pos), p)
    return msg, sig, bool(flags & FLAG_ZERO_NONCES)


def error_frame(p: ParamSet | None, text: str) -> bytes:
    return codec.encode_frame(FrameType.ERROR, p, text.encode())


class SignerEndpoint:
    """Signer side of a session as a pure frame -> frame handler."""

    def __init__(self, prover: Prover, pk: PublicKey, p: ParamSet, rng: RandomStream):
        self.prover, self.pk, self.p, self.rng = prover, pk, p, rng
        self.st: Statement | None = None
        self.state: RoundState | None = None
        self.round = 0
        self.zero_nonces = False
        self.finished: str | None = None
        self._stmt_cache: tuple | None = None

    def _commit_frame(self) -> bytes:
        self.state = self.prover.commit(self.st, self.rng, self.zero_nonces)
        return codec.encode_frame(FrameType.COMMIT, self.p, _u32(self.round) + self.state.comms.to_bytes())

    def handle(self, data: bytes) -> bytes:
        try:
            return self._handle(data)
        except (codec.CodecError, ProtocolError) as exc:
            return error_frame(self.p, f"{type(exc).__name__}: {exc}")

    def _handle(self, data: bytes) -> bytes:
        f = codec.decode_frame(data)
        if f.set_id != codec.SET_IDS[self.p.name]:
            raise ProtocolViolation("parameter set mismatch")
        r = Reader(f.payload)
        if f.ftype == FrameType.INIT:
            if self.st is not None:
                raise ProtocolViolation("session already initialised")
            msg, sig, self.zero_nonces = decode_init(f, self.p)
            key = (msg, sig.sigma3.tobytes())
            if self._stmt_cache and self._stmt_cache[0] == key:
                self.st = self._stmt_cache[1]
            else:
                self.st = Statement(self.pk, msg, sig.sigma3, self.p)
                self._stmt_cache = (key, self.st)
            self.round = 0
            return self._commit_frame()
        if self.st is None:
            raise ProtocolViolation(f"{f.ftype.name} before INIT")
        if f.ftype == FrameType.CHALLENGE:
            rnd, ch = r.u32(), r.u8()
            r.finish()
            if rnd != self.round or self.state is None:
                raise ProtocolViolation(f"challenge for round {rnd}, current round {self.round}")
            if ch > 2:
                raise codec.NonCanonical(f"challenge byte {ch}")
            resp = self.prover.respond(self.state, ch)
            return codec.encode_frame(FrameType.RESPONSE, self.p, _u32(rnd) + resp.to_bytes(self.p))
        if f.ftype == FrameType.NEXT:
            rnd = r.u32()
            r.finish()
            if rnd != self.round + 1 or not self.state.answered:
                raise ProtocolViolation(f"NEXT for round {rnd} out of order")
            self.round = rnd
            return self._commit_frame()
        if f.ftype == FrameType.DONE:
            verdict = r.u8()
            self.finished = [v.value for v in Verdict][verdict] if verdict < 3 else "?"
            self.st, self.state = None, None
            return codec.encode_frame(FrameType.ACK, self.p, b"")
        raise ProtocolViolation(f"unexpected {f.ftype.name} frame")


# -- channels ------------------------------------------------------------------

class Channel(Protocol):
    def request(self, frame: bytes) -> bytes: ...


class LoopbackChannel:
    def __init__(self, handler: Callable[[bytes], bytes]):
        self.handler = handler

    def request(self, frame: bytes) -> bytes:
        return self.handler(frame)

    def close(self):
        pass


def read_frame(rfile) -> bytes | None:
    """Read one frame from a binary stream; None on clean EOF."""
    head = rfile.read(codec.HEADER.size)
    if not head:
        return None
    if len(head) < codec.HEADER.size:
        raise TransportError("stream closed inside a frame header")
    try:
        total = codec.frame_size(head)
    except codec.CodecError as exc:
        raise TransportError(f"bad frame header: {exc}") from None
    rest = rfile.read(total - len(head))
    if len(rest) != total - len(head):
        raise TransportError("stream closed inside a frame")
    return head + rest


class StreamChannel:
    """Verifier side over a pair of binary file objects (pipe or socket)."""

    def __init__(self, rfile, wfile, closer: Callable[[], None] | None = None):
        self.rfile, self.wfile, self._closer = rfile, wfile, closer

    def request(self, frame: bytes) -> bytes:
        try:
            self.wfile.write(frame)
            self.wfile.flush()
            reply = read_frame(self.rfile)
        except OSError as exc:
            raise TransportError(str(exc)) from None
        if reply is None:
            raise TransportError("peer closed the stream")
        return reply

    def close(self):
        if self._closer:
            self._closer()

    @classmethod
    def connect(cls, host: str, port: int, timeout: float = 30.0) -> "StreamChannel":
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise TransportError(f"connect to {host}:{port}: {exc}") from None
        rf, wf = sock.makefile("rb"), sock.makefile("wb")

        def closer():
            rf.close()
            wf.close()
            sock.close()
        return cls(rf, wf, closer)


def serve_stream(endpoint: SignerEndpoint, rfile, wfile) -> str | None:
    """Answer frames until the verifier sends DONE or closes; returns the verdict seen."""
    while True:
        frame = read_frame(rfile)
        if frame is None:
            return endpoint.finished
        wfile.write(endpoint.handle(frame))
        wfile.flush()
        if endpoint.finished is not None:
            return endpoint.finished


def serve_tcp(endpoint: SignerEndpoint, host: str, port: int, ready: Callable[[int], None] | None = None,
              timeout: float = 60.0) -> str | None:
    """Accept one verifier connection and serve a single session."""
    with socket.create_server((host, port)) as srv:
        srv.settimeout(timeout)
        if ready:
            ready(srv.getsockname()[1])
        try:
            conn, _ = srv.accept()
        except OSError as exc:
            raise TransportError(f"accept: {exc}") from None
        with conn:
            conn.settimeout(timeout)
            rf, wf = conn.makefile("rb"), conn.makefile("wb")
            try:
                return serve_stream(endpoint, rf, wf)
            finally:
                rf.close()
                wf.close()


# -- verifier driver -----------------------------------------------------------

class VerifierEndpoint:
    def __init__(self, pk: PublicKey, p: ParamSet, rng: RandomStream, zero_nonces: bool = False,
                 transcript_challenges: bool = False, max_extension: int = 256):
        self.pk, self.p, self.rng = pk, p, rng
        self.zero_nonces = zero_nonces
        self.transcript_challenges = transcript_challenges
        self.max_extension = max_extension
        self._stmt_cache: tuple | None = None

    def _statement(self, msg: bytes, sig: Signature) -> Statement:
        key = (bytes(msg), np.asarray(sig.sigma3).tobytes())
        if self._stmt_cache and self._stmt_cache[0] == key:
            return self._stmt_cache[1]
        st = Statement(self.pk, msg, sig.sigma3, self.p)
        self._stmt_cache = (key, st)
        return st

    def _expect(self, reply: bytes, ftype: FrameType) -> codec.Frame:
        try:
            f = codec.decode_frame(reply)
        except codec.CodecError as exc:
            raise ProtocolViolation(f"malformed frame from signer: {exc}") from None
        if f.ftype == FrameType.ERROR:
            raise ProtocolViolation(f"signer error: {f.payload.decode(errors='replace')}")
        if f.ftype != ftype:
            raise ProtocolViolation(f"expected {ftype.name}, got {f.ftype.name}")
        return f

    def _commitments(self, reply: bytes, rnd: int) -> RoundCommitments:
        r = Reader(self._expect(reply, FrameType.COMMIT).payload)
        if r.u32() != rnd:
            raise ProtocolViolation("commitment for the wrong round")
        comms = RoundCommitments.read(r)
        r.finish()
        return comms

    def _challenge(self, rnd: int, comms: RoundCommitments, msg: bytes) -> int:
        if self.transcript_challenges:
            return transcript_challenge(_u32(rnd) + comms.to_bytes() + msg)
        return verifier_challenge(self.rng)

    def run(self, channel: Channel, msg: bytes, sig: Signature, rounds: int | None = None) -> ProtocolVerdict:
        p = self.p
        rounds = p.rounds if rounds is None else rounds
        static = verify_static(msg, sig, self.pk, p)
        if not static:
            return ProtocolVerdict(Verdict.REJECTED, 0, f"static check failed: {static.value}")
        st = self._statement(msg, sig)
        verdict = self._session(channel, st, msg, sig, rounds)
        try:
            done = bytes([list(Verdict).index(verdict.kind)]) + (verdict.reason or "").encode()
            self._expect(channel.request(codec.encode_frame(FrameType.DONE, p, done)), FrameType.ACK)
        except ProtocolError:
            pass
        return verdict

    def _session(self, channel: Channel, st: Statement, msg: bytes, sig: Signature, rounds: int) -> ProtocolVerdict:
        p = self.p
        records = []
        confirms = disavows = 0
        limit = rounds
        rnd = 0
        reply = channel.request(encode_init(msg, sig, self.zero_nonces))
        while True:
            comms = self._commitments(reply, rnd)
            ch = self._challenge(rnd, comms, msg)
            f = self._expect(channel.request(
                codec.encode_frame(FrameType.CHALLENGE, p, _u32(rnd) + bytes([ch]))), FrameType.RESPONSE)
            r = Reader(f.payload)
            try:
                if r.u32() != rnd:
                    raise ProtocolViolation("response for the wrong round")
                resp = RoundResponse.read(r, p)
                r.finish()
            except codec.CodecError as exc:
                raise ProtocolViolation(f"malformed response: {exc}") from None
            res = verifier_check(comms, ch, resp, None, None, None, None, p, statement=st)
            records.append(RoundRecord(rnd, ch, res.ok, res.evidence, res.reason))
            if not res.ok:
                return ProtocolVerdict(Verdict.REJECTED, rnd, res.reason, rnd + 1, confirms, disavows, records)
            confirms += res.evidence == "confirm"
            disavows += res.evidence == "disavow"
            rnd += 1
            if rnd >= limit:
                if confirms + disavows > 0:
                    break
                if rnd >= rounds + self.max_extension:
                    return ProtocolVerdict(Verdict.REJECTED, rnd - 1, "Inconclusive", rnd, 0, 0, records)
                limit = rnd + 1      # keep going until some round draws ch=1
            reply = channel.request(codec.encode_frame(FrameType.NEXT, p, _u32(rnd)))
        if confirms and disavows:
            return ProtocolVerdict(Verdict.REJECTED, None, "MixedEvidence", rnd, confirms, disavows, records)
        kind = Verdict.CONFIRMED if confirms else Verdict.DISAVOWED
        return ProtocolVerdict(kind, None, None, rnd, confirms, disavows, records)


def run_protocol(signer_endpoint, verifier_endpoint: VerifierEndpoint, msg: bytes, sig: Signature,
                 rounds: int | None = None) -> ProtocolVerdict:
    """Drive one session. ``signer_endpoint`` is a SignerEndpoint or any Channel."""
    if isinstance(signer_endpoint, SignerEndpoint):
        channel = LoopbackChannel(signer_endpoint.handle)
    else:
        channel = signer_endpoint
    return verifier_endpoint.run(channel, msg, sig, rounds)
