#!/usr/bin/env python3
"""Show a Q_c extension of a projection that is incompatible with the original condition."""

from kurepa import make_family
from kurepa.posets import Condition, Q, Q_c, compatible, extends, is_condition, project_to_countable
from kurepa.walks import rho

fam = make_family("f3")
q = Condition.parse({"w^2": ["1"]})
pr = project_to_countable(q, fam)
r = pr.projected.with_entries(Condition.parse({"w^2+1": ["1"]}))
res = compatible(r, q, Q, fam)
print("q          =", q)
print("projection =", pr.projected)
print("r          =", r, "| in Q_c:", is_condition(r, Q_c, fam), "| r <= projection:", extends(r, pr.projected))
print("rho(w^2, w^2+1) =", rho(q.dom[0], r.dom[-1], fam))
print("r compatible with q:", bool(res))
if not res:
    print("certificate:", res.certificate.to_dict())
