"""Conservative transfer of a solution onto the displaced mesh.

With c = x_new - x_old per vertex (linear inside elements), the new
coefficients solve

    M_new U_new = M_old U_old + sum_faces int phi (c.n) u_up - int (c . grad phi) u

where u_up is the trace on the side the face moves into. Transport terms are
evaluated on the old mesh, which makes the transfer exact for zero
displacement and for rigid translations.
"""

import numpy as np
import structlog

from ..exceptions import MeshTopologyError
from .discretization import Discretization
from .limiter import POSITIVITY_EPS, positivity_limit

logger = structlog.get_logger(__name__)


def _check_topology(old: Discretization, new: Discretization) -> None:
    a, b = old.mesh, new.mesh
    issues = []
    if a.n_vertices != b.n_vertices or a.n_elements != b.n_elements:
        issues.append("vertex or element count differs")
    elif a.elements != b.elements:
        issues.append("element connectivity differs")
    if old.scheme is not new.scheme:
        issues.append(f"scheme differs ({old.scheme.value} vs {new.scheme.value})")
    if issues:
        raise MeshTopologyError("cannot remap between meshes of different topology", issues=issues)


def transport_terms(U: np.ndarray, old: Discretization, displacement: np.ndarray) -> np.ndarray:
    """Face and volume transport contributions, shape of U."""
    mesh = old.mesh
    out = np.zeros_like(U)
    c_face = old.vertex_field_at_face_points(displacement)
    cn = np.einsum("fgd,fd->fg", c_face, old.normals)
    w = old.faces.weights

    ul = old.left_traces(U)
    up = ul.copy()
    f = old.interior
    ur = old.right_traces(U, f)
    up[f] = np.where((cn[f] > 0.0)[:, :, None], ur, ul[f])
    flux = (w * cn)[:, :, None] * up
    np.add.at(out, mesh.face_left, np.einsum("fgk,fgm->fkm", old.phi_l, flux))
    np.add.at(out, mesh.face_right[f], -np.einsum("fgk,fgm->fkm", old.phi_r[f], flux[f]))

    if old.n_basis > 1:
        c_vol = old.vertex_field_at_volume_points(displacement)
        c_grad = np.einsum("eqd,eqkd->eqk", c_vol, old.dphi_v)
        out -= np.einsum("eq,eqk,eqm->ekm", old.volume.weights, c_grad, old.volume_values(U))
    return out


def remap_solution(
    U: np.ndarray,
    old: Discretization,
    new: Discretization,
    gamma: float = 1.4,
    eps: float = POSITIVITY_EPS,
    limit: bool = True,
) -> np.ndarray:
    """DoFs on ``new`` from DoFs on ``old``; the positivity limiter is applied afterwards."""
    _check_topology(old, new)
    displacement = new.mesh.vertices - old.mesh.vertices
    if not np.any(displacement):
        return np.array(U, copy=True)

    rhs = np.einsum("ekl,elm->ekm", old.mass, U) + transport_terms(U, old, displacement)
    U_new = np.einsum("ekl,elm->ekm", new.mass_inv, rhs)
    logger.debug(
        "Solution remapped",
        max_displacement=float(np.abs(displacement).max()),
        change=float(np.abs(U_new - U).max()),
    )
    if limit:
        U_new, _ = positivity_limit(U_new, new, gamma, eps)
    return U_new
