"""Real 2n×2n matrices expressing power injections and flows as quadratic forms.

With ``x = (Re V, Im V)`` the per-bus injections are ``P_k = xᵀ Y_k x`` and
``Q_k = xᵀ Ȳ_k x``, the squared magnitude is ``|V_k|² = xᵀ M_k x``, and the
flow leaving bus l on branch (l, m) is ``P_lm = xᵀ Y_lm x``, ``Q_lm = xᵀ Ȳ_lm x``.
A limited branch contributes one such pair for each of its ends.
"""

from dataclasses import dataclass
from typing import List, Tuple

import scipy.sparse as sp

from .model import PowerNetwork


@dataclass(frozen=True)
class OpfMatrices:
    Yk: Tuple[sp.csr_matrix, ...]
    Ybar_k: Tuple[sp.csr_matrix, ...]
    Mk: Tuple[sp.csr_matrix, ...]
    Ylm: Tuple[sp.csr_matrix, ...]  # aligned with net.flow_ends
    Ybar_lm: Tuple[sp.csr_matrix, ...]

    @property
    def size(self) -> int:
        return self.Mk[0].shape[0] if self.Mk else 0


def real_forms(a_re: sp.spmatrix, a_im: sp.spmatrix) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """Symmetric real forms (Y, Ȳ) of a complex matrix given as (Re, Im).

    Y = ½[[Re(a+aᵀ), Im(aᵀ−a)], [Im(a−aᵀ), Re(a+aᵀ)]]
    Ȳ = −½[[Im(a+aᵀ), Re(a−aᵀ)], [Re(aᵀ−a), Im(a+aᵀ)]]
    """
    re_sym = a_re + a_re.T
    im_sym = a_im + a_im.T
    re_skew = a_re - a_re.T
    im_skew = a_im - a_im.T
    y = 0.5 * sp.bmat([[re_sym, -im_skew], [im_skew, re_sym]], format="csr")
    ybar = -0.5 * sp.bmat([[im_sym, re_skew], [-re_skew, im_sym]], format="csr")
    return y, ybar


def _row_only(mat: sp.csr_matrix, k: int) -> sp.csr_matrix:
    """e_k e_kᵀ mat: keep row k, zero elsewhere."""
    n = mat.shape[0]
    select = sp.csr_matrix(([1.0], ([k], [k])), shape=(n, n))
    return select @ mat


def build_opf_matrices(net: PowerNetwork) -> OpfMatrices:
    """Build Y_k, Ȳ_k, M_k for every bus and Y_lm, Ȳ_lm for both ends of every limited branch."""
    n = net.n
    yk: List[sp.csr_matrix] = []
    ybar_k: List[sp.csr_matrix] = []
    mk: List[sp.csr_matrix] = []

    for k in range(n):
        y, ybar = real_forms(_row_only(net.y_re, k), _row_only(net.y_im, k))
        yk.append(y)
        ybar_k.append(ybar)
        mk.append(sp.csr_matrix(([1.0, 1.0], ([k, n + k], [k, n + k])), shape=(2 * n, 2 * n)))

    ylm: List[sp.csr_matrix] = []
    ybar_lm: List[sp.csr_matrix] = []
    for end in net.flow_ends:
        br = net.branches[end.branch]
        s, r = end.sending, end.receiving
        a_re = sp.csr_matrix(([br.g, -br.g], ([s, s], [s, r])), shape=(n, n))
        a_im = sp.csr_matrix(
            ([br.b + br.charging / 2.0, -br.b], ([s, s], [s, r])), shape=(n, n)
        )
        y, ybar = real_forms(a_re, a_im)
        ylm.append(y)
        ybar_lm.append(ybar)

    return OpfMatrices(
        Yk=tuple(yk), Ybar_k=tuple(ybar_k), Mk=tuple(mk), Ylm=tuple(ylm), Ybar_lm=tuple(ybar_lm)
    )
