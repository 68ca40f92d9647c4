"""An endoscopic lift hiding in S_{1,7}(det).

The six forms gamma_ij span S_{1,7}(det).  Split into S3 pieces, the sign
piece carries one eigenform whose T_nu eigenvalue is a_p nu^2 + conj(nu)^7,
where a_p is the p-th coefficient of (eta(tau) eta(3 tau))^6.
"""
from picard.catalog import Catalog, build_span
from picard.hecke import HeckeOperator, eigenvalue, eigenvalues_on_pieces, eta_product, lift_eigenvalue
from picard.structure import isotypic_pieces
from picard.theta import OperatorTable

table = OperatorTable.default()
cat = Catalog(32, table)

pieces = isotypic_pieces(build_span(cat, "s1_7_det"))
print({k: len(v) for k, v in pieces.items()})

for T in (HeckeOperator.T("1+3r"), HeckeOperator.Tm(2)):
    for piece in eigenvalues_on_pieces(None, T, table, pieces):
        for line in piece.lines("s1_7_det"):
            print(line)

a = eta_product(20)
print("eta product coefficients a_7, a_13:", a[7], a[13])
sign_form = pieces["sign"][0]
for nu in ("1+3r", "1-3r"):
    T = HeckeOperator.T(nu)
    got = eigenvalue(sign_form, T, table, n_checks=1).eigenvalue
    want = lift_eigenvalue("kudla", a[T.p], 1, 4, T.alpha)
    print(f"{T}: {got}  lift prediction {want}  {'ok' if got == want else 'MISMATCH'}")
