"""The weight-3 theta forms: expansions, restriction, and Hecke eigenvalues.

phi_0, phi_1, phi_2 span M_3 at level sqrt(-3).  They are Hecke eigenforms
with eigenvalue (p+1) nu + conj(nu)^2 for a split prime nu of norm p and
-1 - p^3 for an inert p.  This script rebuilds them from theta series and
checks both closed forms on the FJ side.
"""
from picard.catalog import Catalog
from picard.eisenstein import CyclotomicRational
from picard.fj import QSeries, restrict_to_curve
from picard.hecke import HeckeOperator, eigenvalue
from picard.theta import OperatorTable

table = OperatorTable.default()
cat = Catalog(32, table)

phi0 = cat.series("phi0")
print("phi_0 =", phi0.truncate(3))
print("zeta  =", cat.series("zeta").truncate(7))

# On the diagonal the FJ series becomes a q-series of weight 3 on Gamma_1(3).
print("phi_0 on the modular curve:", QSeries(restrict_to_curve(phi0).coeffs[:8]))

for nu in ("1+3r", "1-3r"):
    T = HeckeOperator.T(nu)
    v = CyclotomicRational.coerce(T.alpha)
    lam = eigenvalue(phi0, T, table, k=3).eigenvalue
    print(f"{T}: {lam}  closed form {(T.p + 1) * v + v.conjugate() ** 2}")

for p in (2, 5):
    lam = eigenvalue(phi0, HeckeOperator.Tm(p), table, n_checks=1, k=3).eigenvalue
    print(f"T_-{p}: {lam}  closed form {-1 - p ** 3}")
