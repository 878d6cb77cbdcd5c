import cmath
import math
import warnings

import numpy as np
import pytest
import scipy.special

from laglens.errors import BranchEscape, DomainError, InvalidInput, NoConvergence
from laglens.spectrum import (
    AsymptoticWindowWarning, SpectrumRequest, asymptotic_root, asymptotic_root_expanded,
    characteristic_residual, exact_root, in_branch_strip, lambert_identity_check,
    lambert_residual, spacing, spectrum, write_spectrum_csv,
)

PI = math.pi


# -- asymptotic formula -------------------------------------------------------

@pytest.mark.parametrize("T", [2.0, 30.0, 100.0, 1e4])
def test_asym_trivial_root(T):
    assert asymptotic_root(1.0, T, 0) == 0


def test_asym_r1_T100_n1():
    lam = asymptotic_root(1.0, 100.0, 1)
    assert lam == complex(-2 * PI ** 2 / 1e6, 2 * PI / 101)
    assert lam.real == pytest.approx(-1.97392e-5, rel=1e-5)
    assert lam.imag == pytest.approx(0.062210, abs=5e-7)


def test_asym_general_r_verbatim():
    lr = math.log(1.1)
    expected = (1 / 30) * (-lr / 1800 + lr * (1 - 1 / 30 + (1 + lr) / 900))
    assert asymptotic_root(1.1, 30.0, 0) == pytest.approx(expected, rel=1e-15, abs=0)


@pytest.mark.parametrize("n", [0, 1, -2, 7])
@pytest.mark.parametrize("T", [10.0, 100.0, 1000.0])
def test_asym_bracket_reduces_to_resummed(n, T):
    # at r = 1 the bracket is (1/T)[-2n^2pi^2/T^2 + 2inpi(1 - 1/T + 1/T^2)];
    # resumming 1 - 1/T + 1/T^2 ~ 1/(1 + 1/T) changes Im by 2 pi n / (T^3 (T + 1))
    br = asymptotic_root_expanded(1.0, T, n)
    rs = asymptotic_root(1.0, T, n)
    assert br.real == pytest.approx(rs.real, rel=1e-13, abs=1e-300)
    assert br.imag - rs.imag == pytest.approx(2 * PI * n / (T ** 3 * (T + 1)), rel=1e-6, abs=1e-300)


def test_squared_log_term_is_closer_to_exact():
    # n = 0 real root: the (ln r)^2 variant tracks the exact root better
    for T in (30.0, 100.0):
        ex = exact_root(1.1, T, 0).lambda_exact.real
        verbatim = asymptotic_root(1.1, T, 0).real
        squared = asymptotic_root(1.1, T, 0, squared_log=True).real
        assert abs(ex - squared) < abs(ex - verbatim) / 10


# -- exact roots ----------------------------------------------------------------

def test_trivial_root_exact():
    rt = exact_root(1.0, 100.0, 0)
    assert rt.lambda_exact == 0
    assert rt.residual == 0.0
    assert rt.iterations == 0


@pytest.mark.parametrize("T,n", [(5.0, 1), (5.0, -2), (30.0, -4), (30.0, 1), (30.0, 5),
                                 (100.0, -4), (100.0, 2), (100.0, 10)])
def test_exact_root_matches_lambertw(T, n):
    # r = 1: lambda = -1 + W_n(T e^T) / T, T e^T representable for T <= 100
    ref = -1.0 + complex(scipy.special.lambertw(T * math.exp(T), n)) / T
    rt = exact_root(1.0, T, n)
    assert abs(rt.lambda_exact - ref) < 1e-13
    assert rt.residual < 1e-12


def test_exact_near_asym_T100_n1():
    rt = exact_root(1.0, 100.0, 1)
    assert abs(rt.lambda_exact - asymptotic_root(1.0, 100.0, 1)) < 1e-6
    assert rt.residual < 1e-12


@pytest.mark.parametrize("r,T", [(1.0, 100.0), (1.1, 30.0), (0.5, 50.0), (3.0, 20.0)])
@pytest.mark.parametrize("n", [0, 1, 3, 4])
def test_conjugate_symmetry(r, T, n):
    a = exact_root(r, T, n).lambda_exact
    b = exact_root(r, T, -n).lambda_exact
    assert abs(a - b.conjugate()) < 1e-12


def test_real_root_for_n0():
    rt = exact_root(1.1, 30.0, 0)
    assert rt.lambda_exact.imag == 0.0
    assert rt.lambda_exact.real > 0


@pytest.mark.parametrize("r,T,n", [(1.0, 100.0, 10), (1.1, 30.0, 4), (0.8, 40.0, -3)])
def test_branch_containment(r, T, n):
    rt = exact_root(r, T, n)
    assert in_branch_strip(rt.u, n)
    assert rt.u == pytest.approx(rt.lambda_exact * T, rel=1e-15)


def test_branch_escape():
    # far outside the asymptotic window the seed lands on the real axis
    with pytest.raises(BranchEscape, match="branch -4"):
        exact_root(1.0, 5.0, -4)


def test_no_convergence():
    with pytest.raises(NoConvergence, match="branch 5"):
        exact_root(1.0, 2.0, 5)


def test_newton_converges_quickly():
    roots = spectrum(SpectrumRequest(1.0, 100.0, 10))
    assert max(rt.iterations for rt in roots) <= 6


# -- Lambert identity ------------------------------------------------------------

def test_lambert_synthetic():
    assert lambert_residual(1.0, 1.0) == 0.0


@pytest.mark.parametrize("T,n", [(100.0, 1), (30.0, 5), (30.0, -2), (1000.0, 3)])
def test_lambert_identity(T, n):
    assert lambert_identity_check(exact_root(1.0, T, n), T) < 1e-10


def test_lambert_identity_detects_wrong_root():
    rt = exact_root(1.0, 100.0, 1)
    bad = type(rt)(**{**rt.__dict__, "u": rt.u * (1 + 1e-6)})
    assert lambert_identity_check(bad, 100.0) > 1e-8


def test_lambert_rejects_trivial_root():
    with pytest.raises(DomainError):
        lambert_identity_check(exact_root(1.0, 30.0, 0), 30.0)
    with pytest.raises(DomainError):
        lambert_residual(0.0, 30.0)


# -- spectrum ---------------------------------------------------------------------

def test_spectrum_r1_T100():
    roots = spectrum(SpectrumRequest(1.0, 100.0, 10))
    assert [rt.n for rt in roots] == list(range(-10, 11))
    assert max(rt.residual for rt in roots) < 1e-12
    # spacing approaches 2 pi / (T + 1) near the origin
    gaps = np.array(spacing(roots))
    assert abs(gaps[9] - 2 * PI / 101) < 1e-5
    assert abs(gaps[10] - 2 * PI / 101) < 1e-5


def test_spectrum_single_root():
    roots = spectrum(SpectrumRequest(1.0, 100.0, 0))
    assert len(roots) == 1 and roots[0].lambda_exact == 0


def test_asym_error_shrinks_with_T():
    e100 = exact_root(1.0, 100.0, 2).asym_error
    e200 = exact_root(1.0, 200.0, 2).asym_error
    assert e200 <= e100 / 2


def test_asym_error_max_shrinks_with_T():
    m100 = max(rt.asym_error for rt in spectrum(SpectrumRequest(1.0, 100.0, 10)))
    m200 = max(rt.asym_error for rt in spectrum(SpectrumRequest(1.0, 200.0, 10)))
    assert m200 < m100


def test_monotone_damping():
    roots = spectrum(SpectrumRequest(1.0, 100.0, 10))
    re = {rt.n: rt.lambda_exact.real for rt in roots}
    for n in range(10):
        assert re[n + 1] < re[n]
        assert re[-n - 1] < re[-n]


def test_diffusion_correspondence():
    # asymptotic roots = kappa / T^3 + i Lambda / (T + 1), kappa = -Lambda^2 / 2
    T = 100.0
    for n in range(-6, 7):
        lam = 2 * PI * n
        assert asymptotic_root(1.0, T, n) == complex(-lam ** 2 / 2 / T ** 3, lam / (T + 1))


def test_window_flagging():
    with pytest.warns(AsymptoticWindowWarning):
        roots = spectrum(SpectrumRequest(1.1, 30.0, 5))
    assert len(roots) == 11
    flagged = {rt.n for rt in roots if rt.outside_asymptotic_window}
    assert flagged == {-5, 5}
    assert all(rt.residual < 1e-12 for rt in roots)


def test_no_warning_inside_window():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        spectrum(SpectrumRequest(1.0, 100.0, 10))


@pytest.mark.filterwarnings("ignore::laglens.spectrum.AsymptoticWindowWarning")
def test_errors_annotated_with_branch():
    with pytest.raises(NoConvergence, match="branch -5"):
        spectrum(SpectrumRequest(1.0, 2.0, 5))


@pytest.mark.parametrize("kw", [dict(r=0.0, T=1.0, n_max=1), dict(r=1.0, T=-1.0, n_max=1),
                                dict(r=1.0, T=1.0, n_max=-1), dict(r=1.0, T=1.0, n_max=1.5)])
def test_request_validation(kw):
    with pytest.raises(InvalidInput):
        SpectrumRequest(**kw)


def test_large_T_no_overflow():
    # T e^T overflows double precision; the u-plane iteration does not care
    rt = exact_root(1.0, 2000.0, 3)
    assert rt.residual < 1e-12
    assert lambert_identity_check(rt, 2000.0) < 1e-10
    assert characteristic_residual(rt.lambda_exact, 1.0, 2000.0) == rt.residual


def test_spectrum_csv(tmp_path):
    roots = spectrum(SpectrumRequest(1.0, 30.0, 2))
    path = write_spectrum_csv(roots, tmp_path / "s.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "n,re_exact,im_exact,re_asym,im_asym,residual,asym_error,outside_window"
    assert len(lines) == 6
    first = lines[1].split(",")
    assert int(first[0]) == -2
    assert float(first[2]) == roots[0].lambda_exact.imag
