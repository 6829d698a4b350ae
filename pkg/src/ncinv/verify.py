"""Offline re-verification of serialized reports.

Nothing here reuses the code path that produced a certificate: blow-ups are
re-assembled as explicit sums of Kronecker products, determinants come from
the characteristic polynomial instead of elimination, and formula values
are recomputed with every inverse checked by multiplication.
"""

from __future__ import annotations

from .exactalg import ExactMatrix, FieldSpec, det_berkowitz, inverse, kronecker, rank
from .hardinstances import build_Fd, build_Nd, charpoly_kernel
from .ncformula import Add, Const, Inv, Mul, Neg, Var, parse
from .nullcone import degree_bounds
from .pencil import BlowupWitness, Pencil
from .quiver import build_semi_pencil, quiver_from_json


class CertificateError(Exception):
    pass


def explicit_blowup(P: Pencil, tuple_) -> ExactMatrix:
    terms = [kronecker(X, T) for X, T in zip(P.coeffs, tuple_)]
    if P.constant is not None:
        d = tuple_[0].rows if tuple_ else None
        if d is None:
            raise CertificateError("affine witness without tuple")
        terms.append(kronecker(P.constant, ExactMatrix.identity(P.field, d)))
    acc = terms[0]
    for t in terms[1:]:
        acc = acc + t
    return acc


def _check_full_rank_witness(P: Pencil, wobj: dict) -> dict:
    w = BlowupWitness.from_json(P.field, wobj)
    if len(w.tuple) != P.vars or any(T.shape != (w.p, w.q) for T in w.tuple):
        raise CertificateError("witness tuple does not fit the pencil")
    if bool(P.affine) != w.affine:
        raise CertificateError("witness affine flag disagrees with the pencil")
    M = explicit_blowup(P, w.tuple)
    if not M.is_square:
        raise CertificateError("blow-up is not square")
    value = det_berkowitz(M)
    if value == 0:
        raise CertificateError("determinant of the certified blow-up is zero")
    if w.achieved_rank != M.rows:
        raise CertificateError("claimed rank is not full")
    return {"blowup_size": w.p, "det_nonzero": True}


def _eval_checked(f, tup, I):
    if isinstance(f, Var):
        return tup[f.index - 1]
    if isinstance(f, Const):
        return I.scale(f.value)
    if isinstance(f, Neg):
        return -_eval_checked(f.child, tup, I)
    if isinstance(f, Add):
        return _eval_checked(f.left, tup, I) + _eval_checked(f.right, tup, I)
    if isinstance(f, Mul):
        return _eval_checked(f.left, tup, I) @ _eval_checked(f.right, tup, I)
    assert isinstance(f, Inv)
    M = _eval_checked(f.child, tup, I)
    if det_berkowitz(M) == 0:
        raise CertificateError("inverse gate input is singular at the witness")
    N = inverse(M)
    if M @ N != I or N @ M != I:
        raise CertificateError("inverse check failed")
    return N


def verify_report(report: dict) -> dict:
    """Re-verify every certificate in a report; raises CertificateError on any mismatch."""
    cmd = report.get("command")
    res = report.get("result", {})
    inp = report.get("input", {})
    checked: dict = {"command": cmd}

    if cmd in ("nullcone", "invertible"):
        P = Pencil.from_json(inp["pencil"])
        if res["status"] in ("NotInNullCone", "Invertible"):
            checked.update(_check_full_rank_witness(P, res["witness"]))
        else:
            checked["note"] = "Monte Carlo verdict carries no certificate"

    elif cmd == "ncrank":
        P = Pencil.from_json(inp["pencil"])
        best = 0
        for entry, wobj in zip(res["per_d"], res["witnesses"]):
            w = BlowupWitness.from_json(P.field, wobj)
            r = rank(explicit_blowup(P, w.tuple).transpose())
            if r != entry["rank"] or w.p != entry["d"]:
                raise CertificateError(f"rank at d={entry['d']} does not re-verify")
            best = max(best, -(-r // w.p))
        if best != res["best"]:
            raise CertificateError("best lower bound does not follow from the per-d ranks")
        checked["best"] = best

    elif cmd == "quiver":
        field = FieldSpec.from_json(report["config"]["field"])
        Q, dim, weight, rep = quiver_from_json(inp["quiver"], field)
        P = build_semi_pencil(Q, dim, weight, rep, field)
        if P.to_json() != res["pencil"]:
            raise CertificateError("serialized pencil differs from the rebuilt one")
        if res["status"] == "Semistable" and res["witness"] is not None:
            checked.update(_check_full_rank_witness(P, res["witness"]))
        elif res["status"] == "Semistable" and P.rows != 0:
            raise CertificateError("semistable verdict without witness")

    elif cmd == "rit":
        field = FieldSpec.from_json(report["config"]["field"])
        f = parse(inp["formula"])
        if res["status"] == "NonZero":
            wit = res["witness"]
            p = res["dimension"]
            tup = [ExactMatrix.from_json(field, T, p) for T in wit["tuple"]]
            value = _eval_checked(f, tup, ExactMatrix.identity(field, p))
            if value.to_json() != wit["value"]:
                raise CertificateError("recomputed value differs from the serialized one")
            if value.is_zero():
                raise CertificateError("witness value is zero")
            checked["value_nonzero"] = True
        else:
            checked["note"] = "Monte Carlo verdict carries no certificate"

    elif cmd == "hard-instance":
        field = FieldSpec.from_json(report["config"]["field"])
        d = inp["d"]
        inst = build_Fd(d, field, inp.get("lambdas"))
        if inst.pencil.to_json() != res["pencil"]:
            raise CertificateError("serialized pencil differs from the rebuilt one")
        if det_berkowitz(explicit_blowup(inst.pencil, inst.canonical_tuple)) == 0:
            raise CertificateError("canonical substitution is singular")
        for k, cert in res["verification"]["kernel_certificates"].items():
            k = int(k)
            A = ExactMatrix.from_json(field, cert["A"], k)
            Bs = [ExactMatrix.from_json(field, B, k) for B in cert["Bs"]]
            N = build_Nd(d, A, Bs)
            for i in range(k):
                u = [1 if j == i else 0 for j in range(k)]
                v = charpoly_kernel(d, A, Bs, u)
                col = ExactMatrix(field, [[x] for x in v], 1)
                if not (N @ col).is_zero():
                    raise CertificateError(f"kernel residual nonzero at k={k}")
        checked["canonical_invertible"] = True

    elif cmd == "bounds":
        rep = degree_bounds(inp["n"], inp["m"]).to_json()
        if rep != res:
            raise CertificateError("bound report does not match the formulas")

    else:
        raise CertificateError(f"nothing to verify for command {cmd!r}")

    checked["ok"] = True
    return checked
