import math

import numpy as np
import pytest

from lclab import (ContractError, Domain1D, DomainError, Grid1D, PolarGrid,
                   transmission_solve)
from lclab.kernels import require_symmetric


def test_interface_must_sit_on_nodes(domain1d):
    with pytest.raises(DomainError):
        Grid1D(domain1d, 500)  # 5/16 * 500 is not an integer
    grid = Grid1D(domain1d, 512)
    assert grid.x[grid.i1] == domain1d.a1 and grid.x[grid.i2] == domain1d.a2


def test_coupled_operator_matches_hand_assembly():
    # L = 1, h = 1/4, inclusion (1/4, 3/4), lam = 1: the single interior
    # node gains +1, the two interface nodes gain their half-cell +1/2,
    # and the outer nodes carry the mirror closure.
    grid = Grid1D(Domain1D(1.0, 0.25, 0.75), 4)
    op = grid.assemble_coupled(1.0)
    dense = np.diag(1.0 / op.mass) @ op.matrix.toarray()
    h2 = 16.0
    expected = np.array([
        [2 * h2, -2 * h2, 0, 0, 0],
        [-h2, 2 * h2 + 0.5, -h2, 0, 0],
        [0, -h2, 2 * h2 + 1.0, -h2, 0],
        [0, 0, -h2, 2 * h2 + 0.5, -h2],
        [0, 0, 0, -2 * h2, 2 * h2],
    ])
    assert np.allclose(dense, expected)


def test_coupled_rejects_nonpositive_coupling(grid1d):
    with pytest.raises(DomainError):
        grid1d.assemble_coupled(0.0)


def test_quadratic_form_is_gradient_plus_potential(grid1d, rng):
    lam = 7.0
    op = grid1d.assemble_coupled(lam)
    u = rng.standard_normal(grid1d.n_nodes)
    grad = np.diff(u) / grid1d.h
    expected = np.sum(grad ** 2 * grid1d.h) \
        + lam * np.sum(grid1d.pot_measure * u * u)
    assert op.quadratic_form(u) == pytest.approx(expected, rel=1e-12)
    assert op.quadratic_form(u) >= 0


def test_assemblies_are_symmetric(grid1d, polar_grid):
    for op in (grid1d.assemble_coupled(5.0), grid1d.assemble_exterior(),
               grid1d.assemble_interior_neumann(5.0),
               polar_grid.assemble_coupled(5.0),
               polar_grid.assemble_exterior(),
               polar_grid.assemble_interior_neumann(5.0)):
        require_symmetric(op.matrix, tol=1e-14)


def test_exterior_operator_eigenvalue_oracle(domain1d):
    # smallest eigenvalue of the mixed problem on (a2, L) is (pi/(2 len))^2
    exact = (np.pi / (2 * (1.0 - domain1d.a2))) ** 2
    errors = {}
    for n in (256, 512):
        grid = Grid1D(domain1d, n)
        op = grid.assemble_exterior()
        w = np.diag(1.0 / np.sqrt(grid.w_ext))
        vals = np.linalg.eigvalsh(w @ op.matrix.toarray() @ w)
        errors[n] = abs(vals[0] - exact) / exact
    assert errors[256] / errors[512] == pytest.approx(4.0, abs=0.6)
    assert errors[512] < 1e-4


def test_exterior_operator_has_no_constant_kernel(grid1d):
    op = grid1d.assemble_exterior()
    ones = np.ones(grid1d.ext_idx.size)
    assert np.abs(op.apply(ones)).max() > 1.0


def test_interior_screened_constant_source(grid1d):
    # (-u'' + lam) w = 1 with zero flux data has the exact solution 1/lam
    lam = 100.0
    op = grid1d.assemble_interior_neumann(lam)
    w = op.solve(np.ones(grid1d.int_idx.size))
    assert np.abs(w - 1.0 / lam).max() < 1e-10


def test_interior_screened_monotone_in_coupling(grid1d, rng):
    f = rng.uniform(0.5, 1.0, size=grid1d.int_idx.size)
    n1 = np.linalg.norm(grid1d.assemble_interior_neumann(10.0).solve(f))
    n2 = np.linalg.norm(grid1d.assemble_interior_neumann(100.0).solve(f))
    assert n2 < n1


def test_restrict_extend_roundtrip_and_adjointness(grid1d, polar_grid, rng):
    for grid in (grid1d, polar_grid):
        g = rng.standard_normal(grid.ext_idx.size)
        assert np.array_equal(grid.restrict(grid.extend(g)), g)
        full = grid.extend(g)
        assert np.abs(full[grid.interface_idx]).max() == 0.0
        assert np.abs(full[grid.int_idx]).max() == 0.0 if grid.dim == 1 \
            else np.abs(full[: grid.interface_idx[0]]).max() == 0.0
        f = rng.standard_normal(grid.n_nodes)
        lhs = grid.inner_ext(grid.restrict(f), g)
        rhs = grid.inner_full(f, grid.extend(g))
        assert abs(lhs - rhs) <= 1e-14 * max(abs(lhs), 1.0)


def test_restrict_shape_contract(grid1d):
    with pytest.raises(ContractError):
        grid1d.restrict(np.zeros(3))
    with pytest.raises(ContractError):
        grid1d.extend(np.zeros(grid1d.n_nodes))


def test_traces_of_constants_and_linears(grid1d):
    c = np.full(grid1d.n_nodes, 3.25)
    assert np.allclose(grid1d.trace_gamma0(c), 3.25)
    for side in ("interior", "exterior"):
        assert np.abs(grid1d.trace_gamma1(c, side)).max() < 1e-12
    # field = x is linear, so the one-sided stencils are exact: the trace
    # normal points into the inclusion (+1 at a1, -1 at a2)
    x = grid1d.x.copy()
    assert np.allclose(grid1d.trace_gamma1(x, "exterior"), [1.0, -1.0])
    assert np.allclose(grid1d.trace_gamma1(x, "interior"), [1.0, -1.0])


def test_trace_side_validation(grid1d):
    with pytest.raises(DomainError):
        grid1d.trace_gamma1(np.zeros(grid1d.n_nodes), "above")


def test_polar_radial_trace_oracle(disk_domain):
    # field r^2: d/dr = 2R on the ring, normal -r, so gamma1 = -2R exactly
    # up to the O(h^2) stencil error
    errors = []
    for nr in (16, 32):
        grid = PolarGrid(disk_domain, nr_ext=nr, ntheta=16)
        rings = np.concatenate([[0.0], np.repeat(grid.radii, grid.ntheta)])
        field = rings ** 2
        for side in ("exterior", "interior"):
            got = grid.trace_gamma1(field, side)
            errors.append(np.abs(got + 2 * grid.r_inc).max())
    assert max(errors) < 1e-10  # quadratic field: 3-point stencil is exact


def test_polar_weights_tile_the_disk(polar_grid):
    total = polar_grid.w_full.sum()
    assert total == pytest.approx(np.pi * polar_grid.r_out ** 2, rel=1e-12)
    inclusion = polar_grid.pot_measure.sum()
    assert inclusion == pytest.approx(np.pi * polar_grid.r_inc ** 2, rel=1e-12)


def test_polar_interface_is_grid_ring(disk_domain):
    grid = PolarGrid(disk_domain, nr_ext=8, ntheta=16)
    assert grid.nr_int * grid.hr == pytest.approx(grid.r_inc)
    with pytest.raises(DomainError):
        # hr = 0.7/8 does not divide the inclusion radius
        PolarGrid(disk_domain, nr_ext=8, ntheta=16, outer_radius=1.7)


def test_harmonic_extension_zero_and_linear(grid1d):
    out = grid1d.harmonic_extension(np.zeros(2))
    assert np.abs(out).max() == 0.0
    # Dirichlet outer condition: exact affine profile on (a2, L)
    out = grid1d.harmonic_extension(np.array([0.0, 1.0]), outer="dirichlet")
    x = grid1d.x[grid1d.i2:]
    exact = 1.0 - (x - grid1d.domain.a2) / (1.0 - grid1d.domain.a2)
    assert np.abs(out[grid1d.i2:] - exact).max() < 1e-10
    assert np.abs(out[: grid1d.i1 + 1]).max() < 1e-12


def test_harmonic_extension_maximum_principle(grid1d, rng):
    phi = rng.uniform(-1.0, 2.0, size=2)
    out = grid1d.harmonic_extension(phi, outer="neumann")
    ext = out[grid1d.ext_idx]
    assert ext.min() >= phi.min() - 1e-12 and ext.max() <= phi.max() + 1e-12


def test_screened_extension_matches_closed_form(domain1d):
    # oracle: w = c1 cosh(k(x - a1)) + c2 sinh(k(x - a1)) fitted to the
    # flux data in the into-inclusion orientation
    lam, phi = 400.0, np.array([0.8, -0.3])
    k = math.sqrt(lam)
    ell = domain1d.inclusion_length
    c2 = phi[0] / k
    c1 = (-phi[1] / k - c2 * math.cosh(k * ell)) / math.sinh(k * ell)
    errors = {}
    for n in (256, 512):
        grid = Grid1D(domain1d, n)
        w = grid.screened_extension(lam, phi)
        xs = grid.x[grid.int_idx] - domain1d.a1
        exact = c1 * np.cosh(k * xs) + c2 * np.sinh(k * xs)
        errors[n] = np.abs(w[grid.int_idx] - exact).max() / np.abs(exact).max()
    assert errors[256] / errors[512] == pytest.approx(4.0, abs=0.8)
    assert errors[512] < 5e-4


def test_screened_extension_zero_data(grid1d):
    assert np.abs(grid1d.screened_extension(9.0, np.zeros(2))).max() == 0.0


def test_screened_extension_boundary_layer_decay(domain1d):
    lam = 1e4
    grid = Grid1D(domain1d, 1024)
    w = grid.screened_extension(lam, np.array([1.0, 0.0]))
    vals = np.abs(w[grid.i1:grid.i1 + 40])
    ratios = vals[1:] / vals[:-1]
    # discrete decay rate approximates exp(-sqrt(lam) h)
    expected = math.exp(-math.sqrt(lam) * grid.h)
    assert np.allclose(ratios[5:30], expected, rtol=0.05)


def test_transmission_zero_source(grid1d):
    assert np.abs(transmission_solve(grid1d, 50.0, np.zeros(grid1d.n_nodes))
                  ).max() == 0.0


def test_transmission_trace_agreement(grid1d):
    f = np.zeros(grid1d.n_nodes)
    mask = grid1d.x < grid1d.domain.a1
    f[mask] = np.sin(np.pi * grid1d.x[mask] / grid1d.domain.a1)
    u, checks = transmission_solve(grid1d, 1e3, f, check=True)
    assert checks["gamma0_gap"] == 0.0
    assert checks["gamma1_gap"] < 5e-3


def test_transmission_monotone_in_coupling(grid1d):
    f = np.zeros(grid1d.n_nodes)
    mask = (grid1d.x > 0.75) & (grid1d.x < 0.9)
    f[mask] = 1.0
    u1 = transmission_solve(grid1d, 10.0, f)
    u2 = transmission_solve(grid1d, 1000.0, f)
    assert u2.min() >= -1e-12
    assert np.all(u1 - u2 >= -1e-12)


def test_matrix_export_roundtrip(grid1d, tmp_path):
    op = grid1d.assemble_exterior()
    path = tmp_path / "matrix.txt"
    op.export_coordinate_text(path)
    rows = np.loadtxt(path)
    rebuilt = np.zeros((op.dim, op.dim))
    for r, c, v in rows:
        rebuilt[int(r), int(c)] += v
    assert np.allclose(rebuilt, op.matrix.toarray())
