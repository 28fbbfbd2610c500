"""LP-format export of the flow MIP equivalent to the SAA problem.

One binary y per protection action; per sample i and source s, a flow
variable x on every edge and an indicator z in [0,1] per node. The source
row injects the sum of the other z values, every other node consumes its
own z, stochastic edges only carry flow when sampled present or covered by
a selected action, and a single row enforces the budget. Maximizing the
weighted z sum (scaled by 1/N) then reproduces the SAA objective; z stays
integral at the optimum even though it is declared continuous.

The text layout (section order, row naming, term order, float rendering) is
deterministic and kept stable so exports can be diffed across runs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .saa import SaaInstance

_NAME_RE = re.compile(r"[^A-Za-z0-9_.]")


def _num(x: float) -> str:
    v = float(x)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


@dataclass
class MipEncoding:
    """Variable and constraint registry for one exported instance."""

    y_vars: list = field(default_factory=list)
    x_vars: list = field(default_factory=list)
    z_vars: list = field(default_factory=list)
    objective_terms: list = field(default_factory=list)  # (coef, var)
    flow_rows: list = field(default_factory=list)  # (name, [(coef, var)], rhs)
    capacity_rows: list = field(default_factory=list)  # (name, [(coef, var)], rhs)
    budget_rows: list = field(default_factory=list)
    bounds: list = field(default_factory=list)  # (lo, var, hi)

    def counts(self) -> dict:
        return {
            "y": len(self.y_vars),
            "x": len(self.x_vars),
            "z": len(self.z_vars),
            "flow_rows": len(self.flow_rows),
            "capacity_rows": len(self.capacity_rows),
            "budget_rows": len(self.budget_rows),
            "bounds": len(self.bounds),
        }


class _Namer:
    def __init__(self):
        self.taken = set()

    def make(self, *parts) -> str:
        name = "_".join(_NAME_RE.sub("_", str(p)) for p in parts)
        if name[0].isdigit():
            name = "v" + name
        base = name
        k = 1
        while name in self.taken:
            name = f"{base}__{k}"
            k += 1
        self.taken.add(name)
        return name


def encode_mip(instance: SaaInstance, action_ids=None) -> MipEncoding:
    """Build the variable/constraint registry without rendering text."""
    net = instance.network
    if action_ids is None:
        actions = list(net.actions)
    else:
        actions = [net.action(a) for a in action_ids]
    n_nodes = len(net.nodes)
    cap = n_nodes - 1  # max units of flow any edge can carry
    n_samples = instance.n_scenarios
    namer = _Namer()
    enc = MipEncoding()

    y_name = {a.id: namer.make("y", a.id) for a in actions}
    enc.y_vars = [y_name[a.id] for a in actions]
    covering = {eid: [] for eid in net.stochastic_edges}
    for a in actions:
        for eid in a.edge_ids:
            covering[eid].append(y_name[a.id])

    x_name = {}
    z_name = {}
    for i in range(n_samples):
        for s in net.sources:
            for e in net.edges:
                x_name[i, s, e.id] = namer.make("x", i, s, e.id)
            for v in net.nodes:
                z_name[i, s, v.id] = namer.make("z", i, s, v.id)
    enc.x_vars = list(x_name.values())
    enc.z_vars = list(z_name.values())

    inv_n = 1.0 / n_samples
    for i in range(n_samples):
        for s in net.sources:
            for v in net.nodes:
                enc.objective_terms.append((v.weight * inv_n, z_name[i, s, v.id]))

    out_edges = {v.id: [] for v in net.nodes}
    in_edges = {v.id: [] for v in net.nodes}
    for e in net.edges:
        out_edges[e.tail].append(e.id)
        in_edges[e.head].append(e.id)

    for i in range(n_samples):
        theta = instance.scenarios[i].states
        for s in net.sources:
            for v in net.nodes:
                terms = [(1.0, x_name[i, s, eid]) for eid in out_edges[v.id]]
                terms += [(-1.0, x_name[i, s, eid]) for eid in in_edges[v.id]]
                if v.id == s:
                    terms += [
                        (-1.0, z_name[i, s, k.id]) for k in net.nodes if k.id != s
                    ]
                else:
                    terms.append((1.0, z_name[i, s, v.id]))
                enc.flow_rows.append((namer.make("flow", i, s, v.id), terms, 0.0))
            for eid in net.stochastic_edges:
                terms = [(1.0, x_name[i, s, eid])]
                terms += [(-float(cap), y) for y in covering[eid]]
                rhs = float(cap) * theta[eid]
                enc.capacity_rows.append((namer.make("cap", i, s, eid), terms, rhs))

    if actions:
        terms = [(a.cost, y_name[a.id]) for a in actions]
        enc.budget_rows.append(("budget", terms, instance.budget))

    for i in range(n_samples):
        for s in net.sources:
            for e in net.edges:
                enc.bounds.append((0.0, x_name[i, s, e.id], float(cap)))
    for i in range(n_samples):
        for s in net.sources:
            for v in net.nodes:
                enc.bounds.append((0.0, z_name[i, s, v.id], 1.0))
    return enc


def _render_terms(terms) -> str:
    parts = []
    for coef, var in terms:
        if not parts:
            parts.append(f"{_num(coef)} {var}" if coef >= 0 else f"- {_num(-coef)} {var}")
        elif coef >= 0:
            parts.append(f"+ {_num(coef)} {var}")
        else:
            parts.append(f"- {_num(-coef)} {var}")
    return " ".join(parts)


def _wrap(text: str, indent: str = "   ", width: int = 200) -> list:
    words = text.split(" ")
    lines = []
    cur = []
    cur_len = 0
    for w in words:
        if cur and cur_len + 1 + len(w) > width:
            lines.append(indent + " ".join(cur))
            cur = []
            cur_len = 0
        cur.append(w)
        cur_len += len(w) + (1 if cur_len else 0)
    if cur:
        lines.append(indent + " ".join(cur))
    return lines


def render_lp(enc: MipEncoding, comment: Optional[str] = None) -> str:
    lines = []
    if comment:
        for c in comment.splitlines():
            lines.append(f"\\ {c}")
    lines.append("Maximize")
    lines.extend(_wrap("obj: " + _render_terms(enc.objective_terms), indent=" "))
    lines.append("Subject To")
    for name, terms, rhs in enc.flow_rows:
        lines.extend(_wrap(f"{name}: " + _render_terms(terms) + f" = {_num(rhs)}", indent=" "))
    for name, terms, rhs in enc.capacity_rows:
        lines.extend(_wrap(f"{name}: " + _render_terms(terms) + f" <= {_num(rhs)}", indent=" "))
    for name, terms, rhs in enc.budget_rows:
        lines.extend(_wrap(f"{name}: " + _render_terms(terms) + f" <= {_num(rhs)}", indent=" "))
    lines.append("Bounds")
    for lo, var, hi in enc.bounds:
        lines.append(f" {_num(lo)} <= {var} <= {_num(hi)}")
    if enc.y_vars:
        lines.append("Binaries")
        lines.extend(_wrap(" ".join(enc.y_vars), indent=" "))
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_mip_lp(instance: SaaInstance, action_ids=None, comment: Optional[str] = None) -> str:
    """LP-format text of the instance's MIP (see module docstring)."""
    return render_lp(encode_mip(instance, action_ids), comment=comment)
