"""Sigma protocols over discrete-log representations in hidden-order groups.

A :class:`Relation` states ``target == prod(base_i ** x_i) mod modulus``
where the ``x_i`` are named secrets. Statements group relations; secrets
sharing a name share one response, which is what makes equality across
relations (and across differently-moduli groups) provable.

Proofs are non-interactive via Fiat-Shamir. A :class:`ProofBuilder`
aggregates plain (AND) statements and OR groups under one 256-bit
challenge: OR groups use the standard trick of simulating every clause
except the live one with random sub-challenges that are forced to sum to
the global challenge.

Secrets may be negative (the credential presentation needs that), so
responses are signed and checked against symmetric ranges: a secret
declared with ``bits`` satisfies ``abs(x) < 2**bits`` and its response
satisfies ``abs(s) < 2**(bits + challenge_bits + stat_slack + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import MalformedProof, WitnessMismatch
from .arith import Rng, make_rng
from .params import CHALLENGE_BITS, STAT_SLACK, SystemParams
from .transcript import Transcript


@dataclass(frozen=True)
class Relation:
    modulus: int
    target: int
    bases: tuple[int, ...]
    secrets: tuple[str, ...]

    def __post_init__(self):
        if len(self.bases) != len(self.secrets):
            raise MalformedProof("bases and secret names must pair up")


@dataclass
class Statement:
    relations: tuple[Relation, ...]
    secret_bits: dict[str, int]

    def names(self) -> set[str]:
        out = set()
        for rel in self.relations:
            out.update(rel.secrets)
        return out

    def check(self) -> None:
        missing = self.names() - set(self.secret_bits)
        if missing:
            raise MalformedProof(f"no bit width declared for {sorted(missing)}")


@dataclass
class ClauseProof:
    sub_challenge: int
    announcements: list[int]
    responses: dict[str, int]


@dataclass
class OrProof:
    clauses: list[ClauseProof]


@dataclass
class SigmaProof:
    challenge: int
    responses: dict[str, int]
    and_announcements: list[list[int]]
    or_proofs: list[OrProof]

    def to_dict(self) -> dict:
        return {
            "challenge": self.challenge,
            "responses": dict(self.responses),
            "and_announcements": [list(a) for a in self.and_announcements],
            "or_proofs": [
                {
                    "clauses": [
                        {
                            "sub_challenge": c.sub_challenge,
                            "announcements": list(c.announcements),
                            "responses": dict(c.responses),
                        }
                        for c in op.clauses
                    ]
                }
                for op in self.or_proofs
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SigmaProof":
        try:
            return cls(
                challenge=int(d["challenge"]),
                responses={str(k): int(v) for k, v in d["responses"].items()},
                and_announcements=[[int(x) for x in a] for a in d["and_announcements"]],
                or_proofs=[
                    OrProof(
                        clauses=[
                            ClauseProof(
                                sub_challenge=int(c["sub_challenge"]),
                                announcements=[int(x) for x in c["announcements"]],
                                responses={
                                    str(k): int(v) for k, v in c["responses"].items()
                                },
                            )
                            for c in op["clauses"]
                        ]
                    )
                    for op in d["or_proofs"]
                ],
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise MalformedProof(str(exc)) from exc


@dataclass
class _AndPart:
    label: str
    statement: Statement
    witness: dict[str, int] | None


@dataclass
class _OrPart:
    label: str
    clauses: list[Statement]
    live_index: int | None
    witness: dict[str, int] | None


class _Sizing:
    """Challenge width and statistical slack; the group-independent knobs."""

    def __init__(self, params: SystemParams | None):
        self.challenge_bits = params.challenge_bits if params else CHALLENGE_BITS
        self.stat_slack = params.stat_slack if params else STAT_SLACK


def _response_bound(sizing: _Sizing, bits: int) -> int:
    return 1 << (bits + sizing.challenge_bits + sizing.stat_slack + 1)


def _randomizer(sizing: _Sizing, bits: int, rng: Rng) -> int:
    return rng.below(1 << (bits + sizing.challenge_bits + sizing.stat_slack))


def _power_product(rel: Relation, values: dict[str, int]) -> int:
    acc = 1
    for base, name in zip(rel.bases, rel.secrets):
        acc = acc * pow(base, values[name], rel.modulus) % rel.modulus
    return acc


def _check_witness(statement: Statement, witness: dict[str, int]) -> None:
    for name in statement.names():
        if name not in witness:
            raise WitnessMismatch(f"missing secret {name!r}")
        if abs(witness[name]) >= 1 << statement.secret_bits[name]:
            raise WitnessMismatch(f"secret {name!r} outside its declared range")
    for rel in statement.relations:
        if _power_product(rel, witness) != rel.target % rel.modulus:
            raise WitnessMismatch("relation does not hold for the supplied secrets")


def _absorb_statement(t: Transcript, st: Statement) -> None:
    for rel in st.relations:
        t.absorb_int(b"rel.modulus", rel.modulus)
        t.absorb_element(b"rel.target", rel.target % rel.modulus, rel.modulus)
        for base, name in zip(rel.bases, rel.secrets):
            t.absorb_element(b"rel.base", base % rel.modulus, rel.modulus)
            t.absorb(b"rel.secret", name.encode())
            t.absorb_int(b"rel.bits", st.secret_bits[name])


def _absorb_announcements(t: Transcript, st: Statement, anns: list[int]) -> None:
    if len(anns) != len(st.relations):
        raise MalformedProof("announcement count does not match relation count")
    for rel, a in zip(st.relations, anns):
        t.absorb_element(b"ann", a % rel.modulus, rel.modulus)


class ProofBuilder:
    """Aggregates statements and OR groups under a single challenge.

    Both sides construct a builder with identical ``add`` calls in
    identical order; the prover passes witnesses, the verifier does not.
    """

    def __init__(self, params: SystemParams | None = None):
        self.params = _Sizing(params)
        self._parts: list[_AndPart | _OrPart] = []

    def add(self, label: str, statement: Statement, witness: dict[str, int] | None = None):
        statement.check()
        self._parts.append(_AndPart(label, statement, witness))
        return self

    def add_or(
        self,
        label: str,
        clauses: list[Statement],
        live_index: int | None = None,
        witness: dict[str, int] | None = None,
    ):
        if not clauses:
            raise MalformedProof("OR group needs at least one clause")
        for c in clauses:
            c.check()
        if live_index is not None and not 0 <= live_index < len(clauses):
            raise MalformedProof("live clause index out of range")
        self._parts.append(_OrPart(label, clauses, live_index, witness))
        return self

    def _merged_bits(self) -> dict[str, int]:
        bits: dict[str, int] = {}
        for part in self._parts:
            if isinstance(part, _AndPart):
                for name, b in part.statement.secret_bits.items():
                    if bits.setdefault(name, b) != b:
                        raise MalformedProof(
                            f"secret {name!r} declared with conflicting widths"
                        )
        return bits

    def prove(self, transcript: Transcript, rng: Rng | None = None) -> SigmaProof:
        rng = rng or make_rng()
        params = self.params
        cbits = params.challenge_bits
        bits = self._merged_bits()

        witness: dict[str, int] = {}
        for part in self._parts:
            if isinstance(part, _AndPart):
                if part.witness is None:
                    raise WitnessMismatch(f"no witness for part {part.label!r}")
                witness.update(part.witness)
        for part in self._parts:
            if isinstance(part, _AndPart):
                _check_witness(part.statement, witness)

        nonces = {name: _randomizer(params, b, rng) for name, b in bits.items()}

        and_announcements: list[list[int]] = []
        or_states: list[dict] = []
        for part in self._parts:
            if isinstance(part, _AndPart):
                transcript.absorb(b"part", part.label.encode())
                _absorb_statement(transcript, part.statement)
                anns = [_power_product(rel, nonces) for rel in part.statement.relations]
                _absorb_announcements(transcript, part.statement, anns)
                and_announcements.append(anns)
            else:
                transcript.absorb(b"part.or", part.label.encode())
                if part.live_index is None or part.witness is None:
                    raise WitnessMismatch(f"no live clause for OR part {part.label!r}")
                _check_witness(part.clauses[part.live_index], part.witness)
                state = {"clauses": [], "live": part.live_index}
                for idx, clause in enumerate(part.clauses):
                    _absorb_statement(transcript, clause)
                    if idx == part.live_index:
                        u = {
                            name: _randomizer(params, clause.secret_bits[name], rng)
                            for name in clause.names()
                        }
                        anns = [_power_product(rel, u) for rel in clause.relations]
                        state["clauses"].append({"nonces": u, "announcements": anns})
                    else:
                        sub_c = rng.bits(cbits)
                        resp = {
                            name: rng.below(
                                1
                                << (
                                    clause.secret_bits[name]
                                    + cbits
                                    + params.stat_slack
                                )
                            )
                            for name in clause.names()
                        }
                        anns = [
                            _power_product(rel, resp)
                            * pow(rel.target, -sub_c, rel.modulus)
                            % rel.modulus
                            for rel in clause.relations
                        ]
                        state["clauses"].append(
                            {
                                "sub_challenge": sub_c,
                                "responses": resp,
                                "announcements": anns,
                            }
                        )
                    _absorb_announcements(transcript, clause, state["clauses"][-1]["announcements"])
                or_states.append(state)

        challenge = transcript.challenge()

        responses = {name: nonces[name] + challenge * witness[name] for name in bits}

        or_proofs: list[OrProof] = []
        part_or = [p for p in self._parts if isinstance(p, _OrPart)]
        for part, state in zip(part_or, or_states):
            mask = (1 << cbits) - 1
            dead_sum = sum(
                c["sub_challenge"] for i, c in enumerate(state["clauses"]) if i != state["live"]
            )
            live_c = (challenge - dead_sum) & mask
            clauses: list[ClauseProof] = []
            for idx, cstate in enumerate(state["clauses"]):
                if idx == state["live"]:
                    live_clause = part.clauses[idx]
                    resp = {
                        name: cstate["nonces"][name] + live_c * part.witness[name]
                        for name in live_clause.names()
                    }
                    clauses.append(ClauseProof(live_c, cstate["announcements"], resp))
                else:
                    clauses.append(
                        ClauseProof(
                            cstate["sub_challenge"],
                            cstate["announcements"],
                            cstate["responses"],
                        )
                    )
            or_proofs.append(OrProof(clauses))

        return SigmaProof(
            challenge=challenge,
            responses=responses,
            and_announcements=and_announcements,
            or_proofs=or_proofs,
        )

    def verify(self, proof: SigmaProof, transcript: Transcript) -> tuple[bool, str | None]:
        """Return ``(ok, failed_label)``; the label names the first bad part."""
        try:
            return self._verify(proof, transcript)
        except (MalformedProof, ValueError, KeyError, IndexError, TypeError):
            return False, "malformed"

    def _verify(self, proof: SigmaProof, transcript: Transcript) -> tuple[bool, str | None]:
        params = self.params
        cbits = params.challenge_bits
        bits = self._merged_bits()

        and_parts = [p for p in self._parts if isinstance(p, _AndPart)]
        or_parts = [p for p in self._parts if isinstance(p, _OrPart)]
        if len(proof.and_announcements) != len(and_parts):
            return False, "malformed"
        if len(proof.or_proofs) != len(or_parts):
            return False, "malformed"

        and_iter = iter(zip(and_parts, proof.and_announcements))
        or_iter = iter(zip(or_parts, proof.or_proofs))
        replay: list[tuple] = []
        for part in self._parts:
            if isinstance(part, _AndPart):
                part, anns = next(and_iter)
                transcript.absorb(b"part", part.label.encode())
                _absorb_statement(transcript, part.statement)
                _absorb_announcements(transcript, part.statement, anns)
                replay.append((part, anns))
            else:
                part, orp = next(or_iter)
                transcript.absorb(b"part.or", part.label.encode())
                if len(orp.clauses) != len(part.clauses):
                    return False, "malformed"
                for clause, cp in zip(part.clauses, orp.clauses):
                    _absorb_statement(transcript, clause)
                    _absorb_announcements(transcript, clause, cp.announcements)
                replay.append((part, orp))

        expected = transcript.challenge()
        if proof.challenge != expected:
            return False, "challenge"

        for item in replay:
            part = item[0]
            if isinstance(part, _AndPart):
                anns = item[1]
                for name in part.statement.names():
                    if name not in proof.responses:
                        return False, part.label
                    if abs(proof.responses[name]) >= _response_bound(params, bits[name]):
                        return False, part.label
                for rel, ann in zip(part.statement.relations, anns):
                    lhs = _power_product(rel, proof.responses)
                    rhs = ann * pow(rel.target, proof.challenge, rel.modulus) % rel.modulus
                    if lhs != rhs:
                        return False, part.label
            else:
                orp = item[1]
                mask = (1 << cbits) - 1
                total = sum(cp.sub_challenge for cp in orp.clauses) & mask
                if total != proof.challenge & mask:
                    return False, part.label
                for clause, cp in zip(part.clauses, orp.clauses):
                    if not 0 <= cp.sub_challenge < (1 << cbits):
                        return False, part.label
                    for name in clause.names():
                        if name not in cp.responses:
                            return False, part.label
                        bound = _response_bound(params, clause.secret_bits[name])
                        if abs(cp.responses[name]) >= bound:
                            return False, part.label
                    for rel, ann in zip(clause.relations, cp.announcements):
                        lhs = _power_product(rel, cp.responses)
                        rhs = (
                            ann % rel.modulus
                        ) * pow(rel.target, cp.sub_challenge, rel.modulus) % rel.modulus
                        if lhs != rhs:
                            return False, part.label
        return True, None


def prove(
    params: SystemParams | None,
    statement: Statement,
    witness: dict[str, int],
    transcript: Transcript,
    rng: Rng | None = None,
) -> SigmaProof:
    """Prove knowledge of secrets satisfying every relation in ``statement``."""
    return ProofBuilder(params).add("main", statement, witness).prove(transcript, rng)


def verify(
    params: SystemParams | None, statement: Statement, proof: SigmaProof, transcript: Transcript
) -> bool:
    ok, _ = ProofBuilder(params).add("main", statement).verify(proof, transcript)
    return ok


def prove_or(
    params: SystemParams | None,
    clauses: list[Statement],
    live_index: int,
    witness: dict[str, int],
    transcript: Transcript,
    rng: Rng | None = None,
) -> SigmaProof:
    """Prove that at least one clause holds, hiding which one."""
    return (
        ProofBuilder(params)
        .add_or("main", clauses, live_index, witness)
        .prove(transcript, rng)
    )


def verify_or(
    params: SystemParams | None, clauses: list[Statement], proof: SigmaProof, transcript: Transcript
) -> bool:
    ok, _ = ProofBuilder(params).add_or("main", clauses).verify(proof, transcript)
    return ok
