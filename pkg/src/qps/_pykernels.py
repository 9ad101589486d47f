"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Loops run over orbit steps (or lattice sites) and vectorise across phases
(or energies); the per-element arithmetic order matches the compiled code.
"""
import numpy as np

RENORM = 2.0 ** 512
PIVMIN = 2.2250738585072014e-308


def _opnorm(ar, ai, br, bi, cr, ci, dr, di):
    s = np.max(np.abs(np.stack([ar, ai, br, bi, cr, ci, dr, di])), axis=0)
    safe = np.where(s == 0.0, 1.0, s)
    ar, ai, br, bi = ar / safe, ai / safe, br / safe, bi / safe
    cr, ci, dr, di = cr / safe, ci / safe, dr / safe, di / safe
    fro = ar * ar + ai * ai + br * br + bi * bi + cr * cr + ci * ci + dr * dr + di * di
    detr = (ar * dr - ai * di) - (br * cr - bi * ci)
    deti = (ar * di + ai * dr) - (br * ci + bi * cr)
    det2 = detr * detr + deti * deti
    disc = np.maximum(fro * fro - 4.0 * det2, 0.0)
    return np.where(s == 0.0, 0.0, s * np.sqrt(0.5 * (fro + np.sqrt(disc))))


def grid_log_norms(vre, vim, er, ei, m, starts):
    vre = np.ascontiguousarray(vre, dtype=np.float64)
    vim = np.ascontiguousarray(vim, dtype=np.float64)
    n, width = vre.shape
    starts = np.asarray(starts, dtype=np.intp)
    if np.any(starts < 0) or np.any(starts + m > width):
        raise ValueError("window outside the sampled orbit")
    out = np.empty((len(starts), n))
    for s, st in enumerate(starts):
        ar = np.ones(n); ai = np.zeros(n); br = np.zeros(n); bi = np.zeros(n)
        cr = np.zeros(n); ci = np.zeros(n); dr = np.ones(n); di = np.zeros(n)
        acc = np.zeros(n)
        for j in range(st, st + m):
            tr = er - vre[:, j]
            ti = ei - vim[:, j]
            nar = (tr * ar - ti * ai) - cr
            nai = (tr * ai + ti * ar) - ci
            nbr = (tr * br - ti * bi) - dr
            nbi = (tr * bi + ti * br) - di
            cr, ci, dr, di = ar, ai, br, bi
            ar, ai, br, bi = nar, nai, nbr, nbi
            big = np.abs(ar) + np.abs(ai) + np.abs(br) + np.abs(bi) > RENORM
            if big.any():
                idx = np.nonzero(big)[0]
                nrm = _opnorm(ar[idx], ai[idx], br[idx], bi[idx],
                              cr[idx], ci[idx], dr[idx], di[idx])
                for arr in (ar, ai, br, bi, cr, ci, dr, di):
                    arr[idx] = arr[idx] / nrm
                acc[idx] = acc[idx] + np.log(nrm)
        out[s] = acc + np.log(_opnorm(ar, ai, br, bi, cr, ci, dr, di))
    return out


def sturm_counts(diag, energies):
    diag = np.asarray(diag, dtype=np.float64)
    energies = np.asarray(energies, dtype=np.float64)
    tiny = PIVMIN * (1.0 + np.abs(energies))
    delta = diag[0] - energies
    delta = np.where(delta == 0.0, tiny, delta)
    cnt = (delta < 0.0).astype(np.int64)
    with np.errstate(over="ignore", divide="ignore"):
        for k in range(1, len(diag)):
            delta = (diag[k] - energies) - 1.0 / delta
            delta = np.where(delta == 0.0, tiny, delta)
            cnt += delta < 0.0
    return cnt
