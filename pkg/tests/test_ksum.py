import numpy as np
import pytest

from fwqed.ksum import ETA_SCHEDULE, pole_sum, regularized_sum, richardson


def cosine_band(ks):
    return np.ones((1, len(ks))), np.cos(ks)[None, :]


@pytest.mark.parametrize("z", [2.0, -1.5, 0.3 + 0.8j])
def test_pole_sum_closed_form(z):
    # mean_k 1/(z - cos k) = 1/sqrt(z^2 - 1) on the branch with sign of z outside the band
    z = complex(z)
    exact = 1 / (np.sqrt(z - 1) * np.sqrt(z + 1))
    assert pole_sum(cosine_band, z, tol=1e-12)[0] == pytest.approx(exact, abs=1e-10)


def test_regularized_sum_inside_band():
    # for |x| < 1 the retarded value is -i/sqrt(1 - x^2)
    x = 0.4
    val = regularized_sum(cosine_band, x, 1.0, tol=1e-10)[0]
    assert val.real == pytest.approx(0, abs=1e-6)
    assert val.imag == pytest.approx(-1 / np.sqrt(1 - x * x), rel=1e-3)
    adv = regularized_sum(cosine_band, x, 1.0, tol=1e-10, side=-1)[0]
    assert adv == pytest.approx(np.conj(val), abs=1e-8)


def test_richardson_removes_linear_and_quadratic_terms():
    etas = np.array(ETA_SCHEDULE)
    vals = 3.0 + 2.0 * etas - 5.0 * etas**2
    assert richardson(list(vals), etas) == pytest.approx(3.0, abs=1e-14)
    with pytest.raises(ValueError):
        richardson([1.0, 2.0, 3.0], (1e-3, 1e-4, 1e-5))


def test_scale_and_cache_agree():
    plain = pole_sum(cosine_band, 3.0, scale=0.5)
    cached = pole_sum(cosine_band, 3.0, scale=0.5, cache_key=("cos",))
    again = pole_sum(cosine_band, 3.0, scale=0.5, cache_key=("cos",))
    assert plain == pytest.approx(cached) and cached == again
