"""JSON wire formats: channels, states, circuits, and analysis reports.

Complex numbers are always [re, im] pairs and matrices are row-major nested
lists.  Serialization is deterministic: keys are emitted sorted and no
timestamps or environment data enter the payload, so identical inputs and
configuration produce byte-identical documents.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .channels import ChannelError, KrausChannel, preset
from .contraction import ContractionReport, OrthogonalPair, StatePair
from .separability import BipartiteState, CcQqState, SepApproxResult, SeparableChannel
from .decompose import ExtremalCertificate, PConstantReport
from .bounds import CapacityBracket, MemoryTimeBound, OverheadBound


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    try:
        return np.array([[complex(c[0], c[1]) for c in row] for row in rows], dtype=complex)
    except (TypeError, IndexError) as exc:
        raise ChannelError(f"malformed matrix payload: {exc}") from None


def vector_to_json(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def channel_to_json(ch: KrausChannel) -> dict:
    return {
        "in_dim": ch.in_dim,
        "out_dim": ch.out_dim,
        "kraus": [matrix_to_json(k) for k in ch.kraus],
    }


def channel_from_json(obj: dict) -> KrausChannel:
    """Parse either a preset spec {"preset": ..., params} or an explicit
    Kraus list {"in_dim", "out_dim", "kraus": [...]}."""
    if not isinstance(obj, dict):
        raise ChannelError("channel spec must be a JSON object")
    if "preset" in obj:
        params = {k: v for k, v in obj.items() if k != "preset"}
        return preset(obj["preset"], **params)
    if "kraus" not in obj:
        raise ChannelError("channel spec needs either 'preset' or 'kraus'")
    ops = [matrix_from_json(k) for k in obj["kraus"]]
    ch = KrausChannel.from_kraus(ops)
    for key in ("in_dim", "out_dim"):
        if key in obj and int(obj[key]) != getattr(ch, key):
            raise ChannelError(
                f"channel spec {key}={obj[key]} disagrees with Kraus shape {getattr(ch, key)}"
            )
    return ch


def separable_channel_to_json(sep: SeparableChannel) -> dict:
    return {
        "pairs": [[matrix_to_json(ka), matrix_to_json(kb)] for ka, kb in sep.pairs],
    }


def separable_channel_from_json(obj: dict) -> SeparableChannel:
    from .separability import make_separable_channel

    pairs = [(matrix_from_json(a), matrix_from_json(b)) for a, b in obj["pairs"]]
    return make_separable_channel(pairs)


def bipartite_state_to_json(s: BipartiteState) -> dict:
    return {"dimA": s.dim_a, "dimB": s.dim_b, "matrix": matrix_to_json(s.matrix)}


def bipartite_state_from_json(obj: dict) -> BipartiteState:
    return BipartiteState.from_matrix(matrix_from_json(obj["matrix"]), int(obj["dimA"]), int(obj["dimB"]))


def ccqq_to_json(s: CcQqState) -> dict:
    return {
        "dimA": s.dim_a,
        "dimB": s.dim_b,
        "blocks": [
            {"x": list(b.x), "y": list(b.y), "p": b.prob, "matrix": matrix_to_json(b.rho)}
            for b in s.blocks
        ],
    }


def ccqq_from_json(obj: dict) -> CcQqState:
    blocks = [
        (tuple(b["x"]), tuple(b["y"]), float(b["p"]), matrix_from_json(b["matrix"]))
        for b in obj["blocks"]
    ]
    return CcQqState.from_blocks(int(obj["dimA"]), int(obj["dimB"]), blocks)


def _json_float(x: float):
    if x is None:
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def contraction_report_to_json(rep: ContractionReport) -> dict:
    witness = None
    if isinstance(rep.witness, OrthogonalPair):
        witness = {"psi": vector_to_json(rep.witness.psi), "phi": vector_to_json(rep.witness.phi)}
    elif isinstance(rep.witness, StatePair):
        witness = {"rho": matrix_to_json(rep.witness.rho), "sigma": matrix_to_json(rep.witness.sigma)}
    return {
        "value": rep.value,
        "kind": rep.kind,
        "witness": witness,
        "restarts": rep.restarts,
        "iterations": rep.iterations,
        "seed": rep.seed,
        "method": rep.method,
        "extras": {k: _json_float(v) if isinstance(v, float) else v for k, v in rep.extras.items()},
    }


def sep_result_to_json(res: SepApproxResult, include_minimizer: bool = True) -> dict:
    out = {
        "value": _json_float(res.value),
        "method": res.method,
        "iterations": res.iterations,
        "converged": res.converged,
        "extras": {
            k: v for k, v in res.extras.items() if isinstance(v, (int, float, str, bool, list))
        },
    }
    if include_minimizer and res.minimizer is not None:
        out["minimizer"] = matrix_to_json(res.minimizer.matrix)
    return out


def certificate_to_json(cert: ExtremalCertificate) -> dict:
    return {
        "q": cert.q,
        "kraus": [matrix_to_json(k) for k in cert.m.kraus],
        "lambda_min_choi": cert.lambda_min_choi,
        "p2_lower": cert.p2_lower,
        "m_extremal": cert.m_extremal,
        "method": cert.method,
    }


def certificate_from_json(obj: dict) -> tuple[float, KrausChannel]:
    """Re-import a (q, M) pair for validation by the certificate checker."""
    return float(obj["q"]), KrausChannel.from_kraus([matrix_from_json(k) for k in obj["kraus"]])


def p_report_to_json(rep: PConstantReport) -> dict:
    return {
        "p1": rep.p1,
        "p2_lower": rep.p2_lower,
        "p": rep.p,
        "certification": rep.certification,
    }


def bracket_to_json(br: CapacityBracket) -> dict:
    return {
        "lower": br.lower,
        "upper": br.upper,
        "lower_provenance": br.lower_provenance,
        "upper_provenance": br.upper_provenance,
    }


def memory_bound_to_json(mb: MemoryTimeBound) -> dict:
    return {
        "n": mb.n,
        "p": mb.p,
        "log2_threshold": mb.log2_threshold,
        "threshold": _json_float(mb.threshold),
        "epsilon0": mb.epsilon0,
    }


def overhead_to_json(ob: OverheadBound) -> dict:
    bound = {"kind": "impossible"} if ob.impossible else {"kind": "qubits", "value": ob.bound_value}
    return {
        "n": ob.n,
        "log2_T": ob.log2_t,
        "alpha": ob.alpha,
        "capacity_bracket": bracket_to_json(ob.bracket),
        "bound": bound,
        "capacity_term_vacuous": ob.capacity_term_vacuous,
        "notes": list(ob.notes),
    }


def trajectory_to_json_lines(rep) -> list[str]:
    """One compact JSON document per trajectory step."""
    lines = []
    for s in rep.steps:
        lines.append(
            dumps_compact(
                {
                    "step": s.index,
                    "total_prob": s.total_prob,
                    "blocks": s.block_count,
                    "chisep": _json_float(s.chisep_value),
                    "ratio": _json_float(s.ratio),
                    "factor_bound": _json_float(s.factor_bound),
                    "precondition": s.precondition,
                    "factor_ok": s.factor_ok,
                }
            )
        )
    return lines


def trajectory_to_csv_lines(rep) -> list[str]:
    header = "step,total_prob,blocks,chisep,ratio,factor_bound,precondition,factor_ok"
    lines = [header]
    for s in rep.steps:
        cells = [
            str(s.index),
            repr(s.total_prob),
            str(s.block_count),
            "" if s.chisep_value is None else repr(s.chisep_value),
            "" if s.ratio is None else repr(s.ratio),
            "" if s.factor_bound is None else repr(s.factor_bound),
            "" if s.precondition is None else str(s.precondition).lower(),
            "" if s.factor_ok is None else str(s.factor_ok).lower(),
        ]
        lines.append(",".join(cells))
    return lines


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def dumps_compact(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
