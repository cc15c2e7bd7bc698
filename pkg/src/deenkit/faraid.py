"""Sunni inheritance (faraid) in exact rational arithmetic.

Pipeline: validate heirs, remove blocked heirs (hajb), assign fixed shares
(fard), give the remainder to the nearest residuary ('asaba), then reconcile
with 'awl or radd. Two disputed situations return one outcome per school
unless a policy is pinned:

* radd while a spouse is present (hanafi returns the surplus to the other
  fixed-share heirs; jumhur leaves it to the public treasury);
* paternal grandfather with full or paternal siblings (hanafi: the grandfather
  excludes them; jumhur: he takes the best of sharing as a brother, a third of
  the residue, or a sixth of the estate).

The hajb table and residuary chain are the standard reconstruction; the
akdariyya and mushtaraka special cases are not modelled.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from collections.abc import Iterable, Mapping
from typing import Any

from . import prompts
from .core import ExecutionTrace, ValidationError
from .text import ascii_digits, normalize


class HeirKind(str, Enum):
    HUSBAND = "husband"
    WIFE = "wife"
    SON = "son"
    DAUGHTER = "daughter"
    FATHER = "father"
    MOTHER = "mother"
    PATERNAL_GRANDFATHER = "paternal_grandfather"
    GRANDMOTHER = "grandmother"
    SONS_SON = "sons_son"
    SONS_DAUGHTER = "sons_daughter"
    FULL_BROTHER = "full_brother"
    FULL_SISTER = "full_sister"
    PATERNAL_BROTHER = "paternal_brother"
    PATERNAL_SISTER = "paternal_sister"
    UTERINE_SIBLING = "uterine_sibling"


class MadhhabPolicy(str, Enum):
    HANAFI = "hanafi"
    JUMHUR = "jumhur"


# plain-string keys internally: hashing str is much cheaper than hashing Enum members
HUSBAND, WIFE, SON, DAUGHTER, FATHER, MOTHER, GRANDFATHER, GRANDMOTHER = (
    "husband",
    "wife",
    "son",
    "daughter",
    "father",
    "mother",
    "paternal_grandfather",
    "grandmother",
)
SONS_SON, SONS_DAUGHTER = "sons_son", "sons_daughter"
FULL_BROTHER, FULL_SISTER, PATERNAL_BROTHER, PATERNAL_SISTER, UTERINE = (
    "full_brother",
    "full_sister",
    "paternal_brother",
    "paternal_sister",
    "uterine_sibling",
)
TREASURY = "treasury_residual"

KINDS: tuple[str, ...] = tuple(k.value for k in HeirKind)
_KIND_SET = frozenset(KINDS)
SIBLINGS = (FULL_BROTHER, FULL_SISTER, PATERNAL_BROTHER, PATERNAL_SISTER, UTERINE)
MAX_COUNT = {HUSBAND: 1, WIFE: 4, FATHER: 1, MOTHER: 1, GRANDFATHER: 1, GRANDMOTHER: 2}

ZERO, ONE = Fraction(0), Fraction(1)
HALF, THIRD, QUARTER, SIXTH, EIGHTH, TWO_THIRDS = (
    Fraction(1, 2),
    Fraction(1, 3),
    Fraction(1, 4),
    Fraction(1, 6),
    Fraction(1, 8),
    Fraction(2, 3),
)

Heirs = dict[str, int]


# --- validation ------------------------------------------------------------------------


def _split_heirs(heirs: Any) -> tuple[Heirs, list[str]]:
    items = heirs.items() if isinstance(heirs, Mapping) else heirs
    out: Heirs = {}
    unknown: list[str] = []
    for entry in items:
        if isinstance(entry, Mapping):
            kind, count = entry.get("kind"), entry.get("count", 1)
        else:
            kind, count = entry
        if type(kind) is not str or kind not in _KIND_SET:
            kind = kind.value if isinstance(kind, HeirKind) else str(kind).strip().lower()
        if type(count) is not int or count < 0:
            raise ValidationError(f"count for {kind!r} must be a non-negative integer")
        if count == 0:
            continue
        if kind not in _KIND_SET:
            unknown.append(kind)
            continue
        out[kind] = out.get(kind, 0) + count
    return out, unknown


def _check(heirs: Heirs) -> None:
    if HUSBAND in heirs and WIFE in heirs:
        raise ValidationError("husband and wife cannot both inherit from one estate")
    for kind, cap in MAX_COUNT.items():
        n = heirs.get(kind, 0)
        if n > cap:
            raise ValidationError(f"at most {cap} {kind} allowed, got {n}")


def validate_heirs(heirs: Any) -> Heirs:
    """Merge duplicates and enforce structural constraints.

    Accepts a ``{kind: count}`` mapping or an iterable of ``(kind, count)``
    pairs or ``{"kind", "count"}`` records. Unrecognized kinds are dropped.
    """
    out, unknown = _split_heirs(heirs)
    if not out and not unknown:
        raise ValidationError("estate has no heirs")
    _check(out)
    return {k: out[k] for k in KINDS if k in out}


# --- hajb ---------------------------------------------------------------------------------


def apply_hajb(heirs: Mapping[str, int], grandfather_blocks_siblings: bool = False) -> tuple[Heirs, dict[str, str]]:
    """(eligible heirs, {blocked kind: blocking reason})."""
    g = heirs.get
    son, daughter, sons_son = g(SON, 0), g(DAUGHTER, 0), g(SONS_SON, 0)
    father, gf = g(FATHER, 0), g(GRANDFATHER, 0)
    fb, fs, pb = g(FULL_BROTHER, 0), g(FULL_SISTER, 0), g(PATERNAL_BROTHER, 0)
    blocked: dict[str, str] = {}

    if son:
        for k in (SONS_SON, SONS_DAUGHTER):
            if k in heirs:
                blocked[k] = "blocked by son"
    elif daughter >= 2 and not sons_son and SONS_DAUGHTER in heirs:
        blocked[SONS_DAUGHTER] = "blocked: two or more daughters exhaust the two-thirds"
    if father and gf:
        blocked[GRANDFATHER] = "blocked by father"
    if g(MOTHER) and GRANDMOTHER in heirs:
        blocked[GRANDMOTHER] = "blocked by mother"

    if son:
        sib_reason = "blocked by son"
    elif sons_son:
        sib_reason = "blocked by son's son"
    elif father:
        sib_reason = "blocked by father"
    elif gf and grandfather_blocks_siblings:
        sib_reason = "blocked by paternal grandfather"
    else:
        sib_reason = None
    if sib_reason:
        for k in (FULL_BROTHER, FULL_SISTER, PATERNAL_BROTHER, PATERNAL_SISTER):
            if k in heirs:
                blocked[k] = sib_reason
    else:
        female_desc = daughter or g(SONS_DAUGHTER, 0)
        if fb:
            reason = "blocked by full brother"
        elif fs and female_desc:
            reason = "blocked by full sister taking the residue with daughters"
        else:
            reason = None
        if reason:
            for k in (PATERNAL_BROTHER, PATERNAL_SISTER):
                if k in heirs:
                    blocked[k] = reason
        elif fs >= 2 and not pb and PATERNAL_SISTER in heirs:
            blocked[PATERNAL_SISTER] = "blocked: two or more full sisters exhaust the two-thirds"

    if UTERINE in heirs:
        for k, why in ((SON, "son"), (DAUGHTER, "daughter"), (SONS_SON, "son's son"), (SONS_DAUGHTER, "son's daughter"), (FATHER, "father"), (GRANDFATHER, "paternal grandfather")):
            if heirs.get(k):
                blocked[UTERINE] = f"blocked by {why}"
                break

    eligible = {k: n for k, n in heirs.items() if k not in blocked}
    return eligible, blocked


# --- fard -----------------------------------------------------------------------------------


def _has_descendant(h: Mapping[str, int]) -> bool:
    return bool(h.get(SON) or h.get(DAUGHTER) or h.get(SONS_SON) or h.get(SONS_DAUGHTER))


def assign_fard(eligible: Mapping[str, int], siblings_total: int | None = None) -> dict[str, Fraction]:
    """Fixed shares of the eligible heirs (group totals).

    ``siblings_total`` counts siblings before hajb; two or more reduce the
    mother to a sixth even when they are themselves blocked.
    """
    g = eligible.get
    desc = _has_descendant(eligible)
    female_desc = bool(g(DAUGHTER) or g(SONS_DAUGHTER))
    if siblings_total is None:
        siblings_total = sum(g(k, 0) for k in SIBLINGS)
    fard: dict[str, Fraction] = {}

    spouse_share = ZERO
    if g(HUSBAND):
        spouse_share = fard[HUSBAND] = QUARTER if desc else HALF
    if g(WIFE):
        spouse_share = fard[WIFE] = EIGHTH if desc else QUARTER
    if g(FATHER) and desc:
        fard[FATHER] = SIXTH
    if g(GRANDFATHER) and not g(FATHER) and desc:
        fard[GRANDFATHER] = SIXTH
    if g(MOTHER):
        if desc or siblings_total >= 2:
            fard[MOTHER] = SIXTH
        elif g(FATHER) and spouse_share:
            # umariyyatan: a third of what is left after the spouse
            fard[MOTHER] = (ONE - spouse_share) / 3
        else:
            fard[MOTHER] = THIRD
    if g(GRANDMOTHER) and not g(MOTHER):
        fard[GRANDMOTHER] = SIXTH

    d = g(DAUGHTER, 0)
    if d and not g(SON):
        fard[DAUGHTER] = HALF if d == 1 else TWO_THIRDS
    sd = g(SONS_DAUGHTER, 0)
    if sd and not g(SON) and not g(SONS_SON):
        if d == 0:
            fard[SONS_DAUGHTER] = HALF if sd == 1 else TWO_THIRDS
        elif d == 1:
            fard[SONS_DAUGHTER] = SIXTH

    fs = g(FULL_SISTER, 0)
    if fs and not g(FULL_BROTHER) and not female_desc:
        fard[FULL_SISTER] = HALF if fs == 1 else TWO_THIRDS
    ps = g(PATERNAL_SISTER, 0)
    if ps and not g(PATERNAL_BROTHER) and not female_desc:
        if fs == 0:
            fard[PATERNAL_SISTER] = HALF if ps == 1 else TWO_THIRDS
        elif fs == 1 and not g(FULL_BROTHER):
            fard[PATERNAL_SISTER] = SIXTH
    u = g(UTERINE, 0)
    if u:
        fard[UTERINE] = SIXTH if u == 1 else THIRD
    return fard


# --- 'asaba ----------------------------------------------------------------------------------


def residuaries(eligible: Mapping[str, int]) -> tuple[str, ...]:
    """Kinds that take the remainder, nearest class first; empty when none."""
    g = eligible.get
    female_desc = bool(g(DAUGHTER) or g(SONS_DAUGHTER))
    if g(SON):
        return (SON, DAUGHTER) if g(DAUGHTER) else (SON,)
    if g(SONS_SON):
        return (SONS_SON, SONS_DAUGHTER) if g(SONS_DAUGHTER) else (SONS_SON,)
    if g(FATHER):
        return (FATHER,)
    if g(GRANDFATHER):
        return (GRANDFATHER,)
    if g(FULL_BROTHER):
        return (FULL_BROTHER, FULL_SISTER) if g(FULL_SISTER) else (FULL_BROTHER,)
    if g(FULL_SISTER) and female_desc:
        return (FULL_SISTER,)
    if g(PATERNAL_BROTHER):
        return (PATERNAL_BROTHER, PATERNAL_SISTER) if g(PATERNAL_SISTER) else (PATERNAL_BROTHER,)
    if g(PATERNAL_SISTER) and female_desc:
        return (PATERNAL_SISTER,)
    return ()


def _split_two_to_one(amount: Fraction, males: int, male_kind: str | None, females: int, female_kind: str | None) -> dict[str, Fraction]:
    units = 2 * males + females
    out = {}
    if males:
        out[male_kind] = amount * 2 * males / units
    if females:
        out[female_kind] = amount * females / units
    return out


def assign_asaba(eligible: Mapping[str, int], remainder: Fraction) -> dict[str, Fraction]:
    """Remainder to the nearest residuary class; males take twice a female's portion."""
    chain = residuaries(eligible)
    if not chain or remainder <= 0:
        return {}
    if len(chain) == 1:
        return {chain[0]: remainder}
    male, female = chain
    return _split_two_to_one(remainder, eligible[male], male, eligible[female], female)


# --- reconciliation -----------------------------------------------------------------------


def reconcile(
    shares: Mapping[str, Fraction],
    has_residuary: bool,
    policy: MadhhabPolicy | str | None = None,
) -> tuple[dict[str, Fraction], frozenset[str]]:
    """'Awl when shares exceed the estate, radd when a surplus has no residuary.

    Radd excludes spouses. When a spouse is present the surplus goes to the
    other fixed-share heirs (hanafi, or no policy) or to the treasury (jumhur);
    a spouse who is the only heir takes the surplus under hanafi.
    """
    total = sum(shares.values(), ZERO)
    out = dict(shares)
    if total > 1:
        return {k: v / total for k, v in out.items()}, frozenset({"awl"})
    if total == 1 or has_residuary or total == 0:
        return out, frozenset()
    policy = MadhhabPolicy(policy) if policy is not None else None
    spouses = [k for k in (HUSBAND, WIFE) if k in out]
    if policy is MadhhabPolicy.JUMHUR and spouses:
        out[TREASURY] = ONE - total
        return out, frozenset({"treasury_residual"})
    others = {k: v for k, v in out.items() if k not in spouses}
    if not others:
        return {spouses[0]: ONE}, frozenset({"radd"})
    spouse_total = sum((out[k] for k in spouses), ZERO)
    base = sum(others.values(), ZERO)
    pool = ONE - spouse_total
    for k, v in others.items():
        out[k] = pool * v / base
    return out, frozenset({"radd"})


# --- outcomes ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class DistributionOutcome:
    policy: MadhhabPolicy | None
    shares: Mapping[str, Fraction]
    applied: frozenset[str]
    explanation: tuple[str, ...]
    blocked: tuple[tuple[str, str], ...] = ()
    counts: Mapping[str, int] = field(default_factory=dict)
    pre_total: Fraction = ONE

    def total(self) -> Fraction:
        return sum(self.shares.values(), ZERO)

    def per_head(self) -> dict[str, Fraction]:
        return {k: v / self.counts.get(k, 1) for k, v in self.shares.items()}

    def amounts(self, net_estate: Decimal | int | str) -> dict[str, Decimal]:
        """Exact share x estate, converted to Decimal only here."""
        net = Fraction(Decimal(str(net_estate)))
        out = {}
        with localcontext() as ctx:
            ctx.prec = 50
            for k, v in self.shares.items():
                amt = v * net
                out[k] = Decimal(amt.numerator) / Decimal(amt.denominator)
        return out

    def to_dict(self, net_estate: Decimal | int | str | None = None) -> dict[str, Any]:
        heads = self.per_head()
        rows = []
        amounts = self.amounts(net_estate) if net_estate is not None else {}
        for k, v in self.shares.items():
            row: dict[str, Any] = {
                "heir": k,
                "count": self.counts.get(k, 1),
                "share": {"num": v.numerator, "den": v.denominator},
                "per_head": {"num": heads[k].numerator, "den": heads[k].denominator},
            }
            if k in amounts:
                row["amount"] = str(amounts[k].quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))
                row["amount_per_head"] = str(
                    (amounts[k] / row["count"]).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN)
                )
            rows.append(row)
        return {
            "policy": self.policy.value if self.policy else None,
            "shares": rows,
            "applied": sorted(self.applied),
            "blocked": [{"heir": k, "reason": r} for k, r in self.blocked],
            "explanation": list(self.explanation) + [f"{k}: {r}" for k, r in self.blocked],
        }


def _fmt(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _standard(eligible: Heirs, siblings_total: int, policy: MadhhabPolicy | None) -> tuple[dict[str, Fraction], frozenset[str], list[str], Fraction]:
    notes: list[str] = []
    fard = assign_fard(eligible, siblings_total)
    for k, v in fard.items():
        notes.append(f"{k}: fixed share {_fmt(v)}")
    if MOTHER in fard and fard[MOTHER] not in (SIXTH, THIRD):
        notes.append("mother: a third of the remainder after the spouse (umariyyatan)")
    remainder = ONE - sum(fard.values(), ZERO)
    chain = residuaries(eligible)
    asaba = assign_asaba(eligible, remainder)
    shares = dict(fard)
    for k, v in asaba.items():
        shares[k] = shares.get(k, ZERO) + v
        notes.append(f"{k}: residue {_fmt(v)}")
    if chain and not asaba:
        notes.append(f"{', '.join(chain)}: residuary but nothing remains")
    flags = {"asaba"} if asaba else set()
    total = sum(shares.values(), ZERO)
    reconciled, rflags = reconcile(shares, bool(chain), policy)
    if "awl" in rflags:
        notes.append(f"'awl: shares total {_fmt(total)}; each scaled by {_fmt(1 / total)}")
    if "radd" in rflags:
        notes.append(f"radd: surplus {_fmt(ONE - total)} returned to fixed-share heirs other than spouses")
    if "treasury_residual" in rflags:
        notes.append(f"surplus {_fmt(ONE - total)} goes to the public treasury; spouses keep their fixed share")
    return reconciled, frozenset(flags | rflags), notes, total


def _grandfather_jumhur(heirs: Heirs, eligible: Heirs, siblings_total: int) -> tuple[dict[str, Fraction], frozenset[str], list[str], Fraction]:
    """Grandfather sharing with full/paternal siblings (muqasama with mu'adda)."""
    fb, fs = heirs.get(FULL_BROTHER, 0), heirs.get(FULL_SISTER, 0)
    pb, ps = heirs.get(PATERNAL_BROTHER, 0), heirs.get(PATERNAL_SISTER, 0)
    others = {k: n for k, n in eligible.items() if k not in (GRANDFATHER, FULL_BROTHER, FULL_SISTER, PATERNAL_BROTHER, PATERNAL_SISTER)}
    fard = assign_fard(others, siblings_total)
    notes = [f"{k}: fixed share {_fmt(v)}" for k, v in fard.items()]
    taken = sum(fard.values(), ZERO)
    rest = ONE - taken
    muqasama = rest * 2 / (2 + 2 * (fb + pb) + fs + ps)
    if fard:
        g = max(muqasama, rest / 3, SIXTH)
        options = f"sharing {_fmt(muqasama)}, third of residue {_fmt(rest / 3)}, sixth {_fmt(SIXTH)}"
    else:
        g = max(muqasama, THIRD)
        options = f"sharing {_fmt(muqasama)}, third {_fmt(THIRD)}"
    notes.append(f"paternal_grandfather: best of {options} -> {_fmt(g)}")
    shares = dict(fard)
    shares[GRANDFATHER] = g
    left = rest - g
    if left > 0:
        if fb:
            shares.update(_split_two_to_one(left, fb, FULL_BROTHER, fs, FULL_SISTER))
            if pb or ps:
                notes.append("paternal siblings counted against the grandfather, then excluded by full brothers (mu'adda)")
        elif fs:
            cap = HALF if fs == 1 else TWO_THIRDS
            own = min(cap, left)
            if pb or ps:
                shares[FULL_SISTER] = own
                if left - own > 0:
                    shares.update(_split_two_to_one(left - own, pb, PATERNAL_BROTHER, ps, PATERNAL_SISTER))
                notes.append("full sisters take up to their fixed share; paternal siblings take what is left (mu'adda)")
            else:
                shares[FULL_SISTER] = left
        else:
            shares.update(_split_two_to_one(left, pb, PATERNAL_BROTHER, ps, PATERNAL_SISTER))
    total = sum(shares.values(), ZERO)
    reconciled, rflags = reconcile(shares, True, MadhhabPolicy.JUMHUR)
    if "awl" in rflags:
        notes.append(f"'awl: shares total {_fmt(total)}; each scaled by {_fmt(1 / total)}")
    return reconciled, frozenset({"asaba"} | rflags), notes, total


def _freeze(policy, shares, flags, notes, pre_total) -> DistributionOutcome:
    ordered = {k: shares[k] for k in (*KINDS, TREASURY) if k in shares and shares[k] != 0}
    return DistributionOutcome(policy, ordered, flags, tuple(notes), pre_total=pre_total)


@lru_cache(maxsize=200_000)
def _solve(eligible_key: tuple[int, ...], raw_siblings: tuple[int, ...], siblings_total: int, policy: MadhhabPolicy | None, gf_dispute: bool) -> tuple[DistributionOutcome, ...]:
    eligible = {k: n for k, n in zip(KINDS, eligible_key) if n}
    if gf_dispute:
        heirs = dict(eligible)
        heirs.update({k: n for k, n in zip((FULL_BROTHER, FULL_SISTER, PATERNAL_BROTHER, PATERNAL_SISTER), raw_siblings) if n})
        if policy is MadhhabPolicy.HANAFI:
            hanafi_eligible = {k: n for k, n in eligible.items() if k not in (FULL_BROTHER, FULL_SISTER, PATERNAL_BROTHER, PATERNAL_SISTER)}
            shares, flags, notes, total = _standard(hanafi_eligible, siblings_total, policy)
            notes.insert(0, "hanafi: the paternal grandfather excludes siblings as the father would")
            return (_freeze(policy, shares, flags, notes, total),)
        shares, flags, notes, total = _grandfather_jumhur(heirs, eligible, siblings_total)
        notes.insert(0, "jumhur: the paternal grandfather shares with the siblings")
        return (_freeze(policy, shares, flags, notes, total),)

    shares, flags, notes, total = _standard(eligible, siblings_total, policy)
    spouse = HUSBAND in eligible or WIFE in eligible
    if "radd" in flags and spouse and policy is None:
        # surplus with a spouse present: schools differ, report both
        out = []
        for p in (MadhhabPolicy.HANAFI, MadhhabPolicy.JUMHUR):
            s, f, n, t = _standard(eligible, siblings_total, p)
            n.insert(0, f"{p.value}: disputed radd with a spouse present")
            out.append(_freeze(p, s, f, n, t))
        return tuple(out)
    return (_freeze(policy, shares, flags, notes, total),)


def _escheat() -> DistributionOutcome:
    return DistributionOutcome(
        None,
        {TREASURY: ONE},
        frozenset({"treasury_residual"}),
        ("no recognized heir: the estate escheats to the public treasury",),
        pre_total=ZERO,
    )


_ESCHEAT = _escheat()


@dataclass(frozen=True)
class Estate:
    heirs: Mapping[str, int]
    net_estate: Decimal = Decimal(0)


def distribute(estate: Estate | Mapping[str, int] | Iterable, policy: MadhhabPolicy | str | None = None) -> list[DistributionOutcome]:
    """One outcome, or one per school for a disputed case with no pinned policy."""
    raw = estate.heirs if isinstance(estate, Estate) else estate
    heirs, unknown = _split_heirs(raw)
    if not heirs:
        if unknown:
            return [_ESCHEAT]
        raise ValidationError("estate has no heirs")
    _check(heirs)
    policy = MadhhabPolicy(policy) if policy is not None else None
    g = heirs.get
    gf_dispute = bool(
        g(GRANDFATHER)
        and not g(FATHER)
        and not g(SON)
        and not g(SONS_SON)
        and (g(FULL_BROTHER) or g(FULL_SISTER) or g(PATERNAL_BROTHER) or g(PATERNAL_SISTER))
    )
    siblings_total = g(FULL_BROTHER, 0) + g(FULL_SISTER, 0) + g(PATERNAL_BROTHER, 0) + g(PATERNAL_SISTER, 0) + g(UTERINE, 0)
    eligible, blocked = apply_hajb(heirs, grandfather_blocks_siblings=False)
    key = tuple(eligible.get(k, 0) for k in KINDS)
    raw_sibs = (g(FULL_BROTHER, 0), g(FULL_SISTER, 0), g(PATERNAL_BROTHER, 0), g(PATERNAL_SISTER, 0)) if gf_dispute else ()
    mother_key = min(siblings_total, 2)
    if gf_dispute:
        policies = [policy] if policy else [MadhhabPolicy.HANAFI, MadhhabPolicy.JUMHUR]
        cores = [c for p in policies for c in _solve(key, raw_sibs, mother_key, p, True)]
    else:
        cores = list(_solve(key, raw_sibs, mother_key, policy, False))

    counts = {k: heirs[k] for k in KINDS if k in heirs}
    out = []
    for core in cores:
        block_list = dict(blocked)
        if gf_dispute and core.policy is MadhhabPolicy.HANAFI:
            for k in (FULL_BROTHER, FULL_SISTER, PATERNAL_BROTHER, PATERNAL_SISTER):
                if k in heirs and k not in block_list:
                    block_list[k] = "blocked by paternal grandfather (hanafi)"
        applied = core.applied | {"hajb"} if block_list else core.applied
        out.append(DistributionOutcome(core.policy, core.shares, applied, core.explanation, tuple(block_list.items()), counts, core.pre_total))
    return out


# --- estate extraction from free text --------------------------------------------------------

_COUNT_WORDS = {"a": 1, "an": 1, "one": 1, "his": 1, "her": 1, "the": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6}
_COUNT = r"(?:(\d+|a|an|one|two|three|four|five|six|his|her|the)\s+)?"
_EN_HEIRS = [
    (r"(?:uterine|maternal)(?: half)? (?:brothers?|sisters?|siblings?)", UTERINE),
    (r"(?:paternal|consanguine) half (brother|sister)s?|half (brother|sister)s?", "paternal_half"),
    (r"(?:paternal|consanguine) (brother|sister)s?", "paternal_half"),
    (r"son s sons?|grandsons?", SONS_SON),
    (r"son s daughters?|granddaughters?", SONS_DAUGHTER),
    (r"(?:paternal )?grandfathers?", GRANDFATHER),
    (r"grandmothers?", GRANDMOTHER),
    (r"(?:full )?brothers?", FULL_BROTHER),
    (r"(?:full )?sisters?", FULL_SISTER),
    (r"husbands?", HUSBAND),
    (r"wife|wives", WIFE),
    (r"sons?", SON),
    (r"daughters?", DAUGHTER),
    (r"father", FATHER),
    (r"mother", MOTHER),
]
# normalized Arabic (ة -> ه, alef forms unified); (pattern, kind, count)
_AR_HEIRS = [
    (r"اخ(?:وه|ت|تان|ان)? لام", UTERINE, None),
    (r"اخ لاب|اخوه لاب", PATERNAL_BROTHER, None),
    (r"اخت لاب|اخوات لاب", PATERNAL_SISTER, None),
    (r"ابن الابن|ابناء الابن", SONS_SON, None),
    (r"بنت الابن|بنات الابن", SONS_DAUGHTER, None),
    (r"جده", GRANDMOTHER, 1),
    (r"جد", GRANDFATHER, 1),
    (r"زوجتان|زوجتين", WIFE, 2),
    (r"زوجه", WIFE, 1),
    (r"زوج", HUSBAND, 1),
    (r"ابنان|ابنين", SON, 2),
    (r"ابناء", SON, 3),
    (r"ابن", SON, 1),
    (r"بنتان|بنتين|ابنتان|ابنتين", DAUGHTER, 2),
    (r"بنات", DAUGHTER, 3),
    (r"بنت|ابنه", DAUGHTER, 1),
    (r"اب|والد", FATHER, 1),
    (r"ام|والده", MOTHER, 1),
    (r"اخوان|اخوين", FULL_BROTHER, 2),
    (r"اخوه", FULL_BROTHER, 3),
    (r"اخ(?: شقيق)?", FULL_BROTHER, 1),
    (r"اختان|اختين", FULL_SISTER, 2),
    (r"اخوات", FULL_SISTER, 3),
    (r"اخت(?: شقيقه)?", FULL_SISTER, 1),
]
_AMOUNT = re.compile(r"(\d[\d,]*(?:\.\d+)?)\s*(k\b|thousand\b|million\b|m\b|الف|مليون)?")
_HEIR_AFTER = re.compile(
    "(?:" + "|".join(p for p, _k in _EN_HEIRS) + "|" + "|".join(p for p, _k, _c in _AR_HEIRS) + r"|full|paternal|maternal|uterine|half)(?!\w)"
)
_AMOUNT_MULT = {"k": 1000, "thousand": 1000, "الف": 1000, "million": 10**6, "m": 10**6, "مليون": 10**6}


@dataclass(frozen=True)
class EstateRequest:
    heirs: dict[str, int]
    net_estate: Decimal | None
    notes: tuple[str, ...] = ()


# "my father died ..." names the deceased, not an heir
_DECEASED = re.compile(
    r"(?<!\w)(?:my|our|his|her|a|the) (?:late )?\w+(?: \w+)? (?:died|has died|passed away|has passed away|is deceased)(?!\w)"
)


def _blank(text: str, m: re.Match) -> str:
    return text[: m.start()] + " " * (m.end() - m.start()) + text[m.end() :]


def regex_estate(query: str) -> EstateRequest:
    """Heirs and estate value from English or Arabic free text."""
    text = " " + normalize(query) + " "
    heirs: dict[str, int] = {}
    notes: list[str] = []
    while (m := _DECEASED.search(text)) is not None:
        text = _blank(text, m)
    for pattern, kind in _EN_HEIRS:
        rx = re.compile(r"(?<!\w)" + _COUNT + r"(" + pattern + r")(?!\w)")
        while (m := rx.search(text)) is not None:
            noun = m.group(2)
            if kind == "paternal_half":
                k = PATERNAL_SISTER if "sister" in noun else PATERNAL_BROTHER
            elif kind == UTERINE:
                k = UTERINE
            else:
                k = kind
            word = m.group(1)
            if word is None:
                plural = noun.endswith("s") and not noun.endswith("ss") or noun in ("wives",)
                count = 2 if plural else 1
                if plural:
                    notes.append(f"count of {k} not stated; assumed 2")
            else:
                count = int(word) if word.isdigit() else _COUNT_WORDS[word]
            heirs[k] = heirs.get(k, 0) + count
            text = _blank(text, m)
    for pattern, kind, fixed in _AR_HEIRS:
        rx = re.compile(r"(?<!\w)(?:و)?(?:(\d+) )?(?:و)?(?:ال)?(?:" + pattern + r")(?!\w)")
        while (m := rx.search(text)) is not None:
            count = int(m.group(1)) if m.group(1) else (fixed or 2)
            heirs[kind] = heirs.get(kind, 0) + count
            text = _blank(text, m)
    amounts = []
    raw = ascii_digits(query).lower()
    for m in _AMOUNT.finditer(raw):
        # "2 daughters" is a head count, not money
        if _HEIR_AFTER.match(normalize(raw[m.end() :][:40])):
            continue
        amounts.append(Decimal(m.group(1).replace(",", "")) * _AMOUNT_MULT.get(m.group(2) or "", 1))
    net = max(amounts) if amounts else None
    return EstateRequest(heirs, net, tuple(notes))


def extract_estate(query: str, generator: Any = None, trace: ExecutionTrace | None = None) -> EstateRequest:
    """Provider JSON extraction first, regex fallback second."""
    if generator is not None:
        try:
            raw = generator.generate(prompts.render(prompts.ESTATE_EXTRACT, question=query), temperature=0.0, max_tokens=300)
            start, end = raw.find("{"), raw.rfind("}")
            doc = json.loads(raw[start : end + 1]) if start >= 0 < end else None
            if isinstance(doc, dict) and doc.get("heirs"):
                heirs, unknown = _split_heirs(doc["heirs"])
                if heirs and not unknown:
                    net = doc.get("net_estate")
                    if trace is not None:
                        trace.add("inheritance", "heirs from provider extraction")
                    return EstateRequest(heirs, Decimal(str(net)) if net is not None else None)
        except Exception as exc:
            if trace is not None:
                trace.warn("inheritance", f"provider extraction unusable: {exc}")
    found = regex_estate(query)
    if trace is not None:
        trace.add("inheritance", f"heirs from regex fallback: {found.heirs or 'none'}")
    return found
