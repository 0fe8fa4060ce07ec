import math

import numpy as np
import pytest

from sigrep.brownian import TimeGrid, sample_brownian
from sigrep.errors import KernelDomainError
from sigrep.models import (
    DelayParams,
    DiracMixture,
    ExpSumKernel,
    VolterraParams,
    constant_kernel,
    delay_domination_witness,
    delay_functional,
    delay_pair,
    delay_params_from_dict,
    exponential_kernel,
    fractional_dirac_mixture,
    gaussian_volterra_functional,
    laplace_exp_integral,
    ou_time_functional,
    riemann_liouville_functional,
    riemann_liouville_kernel,
    rising_factorial,
    volterra_domination_witness,
    volterra_functional,
    volterra_pair,
    volterra_params_from_dict,
)
from sigrep.signature import evaluate, signature_stream
from sigrep.tensor import (
    TruncatedTensor,
    concat_mul,
    dominates,
    project,
    shuffle_exp,
)

from test_tensor import assert_tensors_close, word_tensor

DIRAC_ZERO = DiracMixture.point(0.0)


def ou_params(y=0.0, a1=0.0, b1=-1.0, a2=1.0):
    return VolterraParams.scalar(y, a1, b1, DIRAC_ZERO, a2, 0.0, DIRAC_ZERO)


class TestLaplaceExpIntegral:
    def test_dirac_at_zero_is_unit(self):
        out = laplace_exp_integral(DIRAC_ZERO, 2, 4)
        assert_tensors_close(out, TruncatedTensor.unit(2, 4), tol=0.0)

    def test_single_atom(self):
        out = laplace_exp_integral(DiracMixture.point(1.5, weight=2.0), 2, 3)
        for n in range(4):
            assert out.coeff((1,) * n) == pytest.approx(2.0 * (-1.5) ** n)

    def test_two_atoms(self):
        mix = DiracMixture(((1.0, 1.0), (1.0, 2.0)))
        out = laplace_exp_integral(mix, 2, 2)
        assert out.coeff((1,)) == pytest.approx(-3.0)
        assert out.coeff((1, 1)) == pytest.approx(5.0)


class TestVolterraPair:
    def test_flat_kernel_reduces_to_markovian(self):
        p, q = volterra_pair(
            VolterraParams.scalar(0.7, 1.2, 0.4, DIRAC_ZERO, 2.0, 0.0, DIRAC_ZERO), 4
        )
        expected_p = (
            0.7 * TruncatedTensor.unit(2, 4)
            + 1.2 * word_tensor(2, 4, (1,))
            + 2.0 * word_tensor(2, 4, (2,))
        )
        assert_tensors_close(p, expected_p, tol=0.0)
        assert_tensors_close(q, 0.4 * word_tensor(2, 4, (1,)), tol=0.0)

    def test_geometric_case(self):
        y, b1, b2 = 1.0, 0.3, 0.5
        p, q = volterra_pair(
            VolterraParams.scalar(y, 0.0, b1, DIRAC_ZERO, 0.0, b2, DIRAC_ZERO), 4
        )
        assert_tensors_close(p, y * TruncatedTensor.unit(2, 4), tol=0.0)
        expected_q = (b1 - 0.5 * b2**2) * word_tensor(2, 4, (1,)) + b2 * word_tensor(2, 4, (2,))
        assert_tensors_close(q, expected_q, tol=1e-15)

    @pytest.mark.parametrize("b2", [0.0, 0.4])
    def test_memory_part_has_no_scalar(self, b2):
        mix = DiracMixture(((0.5, 0.3), (0.2, 2.0)))
        _, q = volterra_pair(VolterraParams.scalar(1.0, 0.5, -0.7, mix, 0.3, b2, mix), 5)
        assert q.scalar == 0.0


def generic_volterra(level_cap=6):
    mu1 = DiracMixture(((0.3, 0.5),))
    mu2 = DiracMixture(((0.4, 1.2),))
    params = VolterraParams.scalar(0.8, 0.6, -0.5, mu1, 1.1, 0.4, mu2, )
    return params, volterra_functional(params, level_cap)


class TestVolterraFunctional:
    def test_flat_kernel_closed_form(self):
        y, a1, b1, a2 = 0.5, 1.0, -0.6, 1.3
        ell = volterra_functional(ou_params(y, a1, b1, a2), 5)
        head = (
            y * TruncatedTensor.unit(2, 5)
            + a1 * word_tensor(2, 5, (1,))
            + a2 * word_tensor(2, 5, (2,))
        )
        expected = concat_mul(head, shuffle_exp(b1 * word_tensor(2, 5, (1,))))
        assert_tensors_close(ell, expected, tol=1e-13)

    def test_fixed_point(self):
        params, ell = generic_volterra()
        p, q = volterra_pair(params, 6)
        assert_tensors_close(ell, p + concat_mul(ell, q), tol=1e-12)

    def test_noise_projection_identities(self):
        params, ell = generic_volterra()
        k20 = params.mixtures[1].at_zero()
        a2, b2 = params.a[1], params.b[1]
        base = k20 * (a2 * TruncatedTensor.unit(2, 6) + b2 * ell)
        assert_tensors_close(project(ell, (2,)), base, tol=1e-12, up_to_level=5)
        assert_tensors_close(
            project(ell, (2, 2)), k20 * b2 * base, tol=1e-12, up_to_level=4
        )

    def test_domination_witness(self):
        params, ell = generic_volterra()
        _, q = volterra_pair(params, 6)
        ok, violation = dominates(q, volterra_domination_witness(params, 6))
        assert ok, f"violated at {violation}"


FIG2A = dict(z=0.0, a1=1.5, b1=0.0, c1=-1.0, alpha1=-2.0, a2=3.0, b2=0.0, c2=-2.0, alpha2=-1.0)
FIG2B = dict(z=0.0, a1=-1.0, b1=-2.0, c1=2.0, alpha1=-3.0, a2=1.0, b2=1.0, c2=1.0, alpha2=-3.0)


def delay_params(cfg: dict) -> DelayParams:
    return DelayParams.scalar(
        cfg["z"], cfg["a1"], cfg["b1"], ExpSumKernel(((cfg["c1"], cfg["alpha1"]),)),
        cfg["a2"], cfg["b2"], ExpSumKernel(((cfg["c2"], cfg["alpha2"]),)),
    )


def time_conv_block(d, cap, kernel: ExpSumKernel) -> TruncatedTensor:
    """sum_m c_m letter1 (x) exp_shuffle(alpha_m letter1), built in the algebra."""
    out = TruncatedTensor.zeros(d, cap)
    one = word_tensor(d, cap, (1,))
    for c, alpha in kernel.terms:
        out = out + c * concat_mul(one, shuffle_exp(alpha * one))
    return out


class TestDelayFunctional:
    def test_vanishing_kernels_reduce_to_volterra(self):
        zero_kernel = ExpSumKernel(())
        params = DelayParams.scalar(0.9, 0.2, -0.4, zero_kernel, 1.5, 0.3, zero_kernel)
        vol = VolterraParams.scalar(0.9, 0.2, -0.4, DIRAC_ZERO, 1.5, 0.3, DIRAC_ZERO)
        assert_tensors_close(
            delay_functional(params, 5), volterra_functional(vol, 5), tol=1e-13
        )

    @pytest.mark.parametrize("cfg", [FIG2A, FIG2B])
    def test_fixed_point(self, cfg):
        params = delay_params(cfg)
        ell = delay_functional(params, 6)
        p, q = delay_pair(params, 6)
        assert q.scalar == 0.0
        assert_tensors_close(ell, p + concat_mul(ell, q), tol=1e-12)

    @pytest.mark.parametrize("cfg", [FIG2A, FIG2B])
    def test_projection_identities(self, cfg):
        params = delay_params(cfg)
        cap = 6
        ell = delay_functional(params, cap)
        unit = TruncatedTensor.unit(2, cap)
        conv1 = time_conv_block(2, cap, params.kernels[0])
        conv2 = time_conv_block(2, cap, params.kernels[1])
        lhs_noise = project(ell, (2,))
        rhs_noise = concat_mul(ell, params.b[1] * unit + conv2) + params.a[1] * unit
        assert_tensors_close(lhs_noise, rhs_noise, tol=1e-12, up_to_level=cap - 1)
        lhs_gen = project(ell, (1,)) + 0.5 * project(ell, (2, 2))
        rhs_gen = concat_mul(ell, params.b[0] * unit + conv1) + params.a[0] * unit
        assert_tensors_close(lhs_gen, rhs_gen, tol=1e-12, up_to_level=cap - 2)

    @pytest.mark.parametrize("cfg", [FIG2A, FIG2B])
    def test_domination_witness(self, cfg):
        params = delay_params(cfg)
        _, q = delay_pair(params, 6)
        ok, violation = dominates(q, delay_domination_witness(params))
        assert ok, f"violated at {violation}"


class TestGaussianVolterraFunctional:
    def test_constant_kernel_is_noise_letter(self):
        for t in (0.2, 1.0, 7.0):
            out = gaussian_volterra_functional(constant_kernel(), t, 5)
            assert_tensors_close(out, word_tensor(2, 5, (2,)), tol=0.0)

    def test_exponential_kernel_coefficients(self):
        kappa, t = 1.4, 0.8
        out = gaussian_volterra_functional(exponential_kernel(kappa), t, 6)
        for n in range(6):
            assert out.coeff((1,) * n + (2,)) == pytest.approx(
                math.exp(-kappa * t) * kappa**n, rel=1e-13
            )

    def test_matches_shuffle_exponential_form(self):
        # exp_shuffle(-kappa (t unit - letter1)) (x) letter2
        kappa, t, cap = 0.9, 0.5, 6
        arg = -kappa * t * TruncatedTensor.unit(2, cap) + kappa * word_tensor(2, cap, (1,))
        expected = concat_mul(shuffle_exp(arg), word_tensor(2, cap, (2,)))
        out = gaussian_volterra_functional(exponential_kernel(kappa), t, cap)
        assert_tensors_close(out, expected, tol=1e-13)

    def test_zero_for_nonpositive_time(self):
        out = gaussian_volterra_functional(exponential_kernel(1.0), 0.0, 4)
        assert out.max_abs() == 0.0


class TestRiemannLiouville:
    def test_rising_factorial(self):
        assert rising_factorial(0.4, 0) == 1.0
        assert rising_factorial(0.4, 3) == pytest.approx(0.4 * 1.4 * 2.4)
        assert rising_factorial(-0.3, 2) == pytest.approx(-0.3 * 0.7)
        assert rising_factorial(0.0, 2) == 0.0
        # log-space survives sizes that overflow a naive product of many terms
        assert rising_factorial(0.5, 30) == pytest.approx(
            math.gamma(30.5) / math.gamma(0.5), rel=1e-12
        )

    def test_half_hurst_is_plain_noise(self):
        for t, eps in ((0.5, 0.0), (1.0, 1 / 52), (0.0, 0.3)):
            out = riemann_liouville_functional(0.5, eps, t, 6)
            assert_tensors_close(out, word_tensor(2, 6, (2,)), tol=1e-15)

    def test_first_order_coefficient(self):
        hurst, eps, t = 0.3, 1 / 52, 0.4
        out = riemann_liouville_functional(hurst, eps, t, 4)
        expected = (t + eps) ** (hurst - 1.5) * (0.5 - hurst) / math.gamma(hurst + 0.5)
        assert out.coeff((1, 2)) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("hurst", [0.1, 0.3, 0.7, 0.9])
    def test_agrees_with_derivative_oracle(self, hurst):
        t, cap = 0.7, 8
        direct = riemann_liouville_functional(hurst, 0.0, t, cap)
        via_oracle = gaussian_volterra_functional(riemann_liouville_kernel(hurst), t, cap)
        assert_tensors_close(direct, via_oracle, tol=1e-12)

    def test_domain_error(self):
        with pytest.raises(KernelDomainError):
            riemann_liouville_functional(0.3, 0.0, 0.0, 4)
        with pytest.raises(KernelDomainError):
            riemann_liouville_functional(1.2, 0.1, 0.5, 4)


class TestOuDualRepresentation:
    def test_time_dependent_and_time_independent_agree(self):
        # X_t = int e^{b1 (t-s)} dW_s two ways: flat-kernel Volterra coefficients
        # against the exponential-kernel time-dependent coefficients
        kappa, cap = 1.0, 10
        grid = TimeGrid(1.0, 200)
        stream = signature_stream(sample_brownian(grid, 1, 33, 0), cap)
        static = volterra_functional(ou_params(b1=-kappa), cap)
        moving = ou_time_functional(kappa, cap)
        series_static = evaluate(static, stream)
        series_moving = evaluate(moving, stream)
        assert np.max(np.abs(series_static - series_moving)) < 1e-7


class TestFractionalMixture:
    def test_atom_signs_and_count(self):
        mix = fractional_dirac_mixture(0.1, 25)
        assert len(mix.atoms) == 25
        assert all(c > 0 and x > 0 for c, x in mix.atoms)

    def test_kernel_value_at_zero_grows(self):
        values = [fractional_dirac_mixture(0.1, n).at_zero() for n in (10, 20, 40, 80)]
        assert all(np.isfinite(values))
        assert values == sorted(values)

    def test_l2_error_decreases(self):
        hurst = 0.1
        target = riemann_liouville_kernel(hurst)
        # brute quadrature away from the origin plus the exact singular head
        t = np.linspace(1e-4, 1.0, 20001)
        errors = []
        for n in (10, 20, 40, 80):
            mix = fractional_dirac_mixture(hurst, n)
            diff = mix.kernel_value(t) - target(t)
            errors.append(np.trapezoid(diff**2, t))
        assert errors == sorted(errors, reverse=True)

    def test_domain_checks(self):
        with pytest.raises(KernelDomainError):
            fractional_dirac_mixture(0.6, 10)
        with pytest.raises(ValueError):
            fractional_dirac_mixture(0.1, 0)


class TestConfigParsing:
    def test_volterra_from_dict(self):
        params = volterra_params_from_dict(
            {"y": 1.0, "a1": 0.1, "b1": 0.2, "a2": 0.3, "b2": 0.4, "mu2": [[0.5, 1.0], [0.5, 2.0]]}
        )
        assert params.y == 1.0
        assert params.mixtures[0].atoms == ((1.0, 0.0),)
        assert params.mixtures[1].atoms == ((0.5, 1.0), (0.5, 2.0))

    def test_delay_from_dict(self):
        params = delay_params_from_dict(
            {"z": 0.0, "a1": 1.5, "k1": [[-1.0, -2.0]], "a2": 3.0, "k2": [[-2.0, -1.0]]}
        )
        assert params.kernels[0].terms == ((-1.0, -2.0),)
        assert params.b == (0.0, 0.0)
