import numpy as np
import pytest

from localme.budget import K, error_budget


def test_filtered_norm_bound():
    eb = error_budget(1, 0.5, 1.0)
    assert np.isclose(eb.af_norm_bound, 4 * np.sqrt(np.pi) * np.e * 0.5)


def test_no_averaging_error_without_window():
    assert error_budget(1, 0.5, 1.0, T_prime=0.0).eps_ave == 0.0


@pytest.mark.parametrize("n", [1, 2, 5])
def test_integral_other_row(n):
    eb = error_budget(n, 0.5, 1.0, T_prime=0.3)
    assert np.isclose(eb.tables["n_qubits"]["integral"]["other"], 0.3 * 0.25 * n ** 2)


def test_scalings():
    a = error_budget(1, 0.2, 1.0, t=2.0)
    b = error_budget(1, 0.1, 1.0, t=2.0)
    assert np.isclose(a.eps_mkv / b.eps_mkv, 16)
    assert np.isclose(a.eps_born / b.eps_born, 16)
    assert np.isclose(a.eps_rwa_opt / b.eps_rwa_opt, 8)
    assert np.isclose(a.eps_mkv, K ** 2 * 0.2 ** 4 * 2.0)


def test_rows_and_short_time_flag():
    eb = error_budget(2, 0.5, 2.0, t=1.0)
    assert eb.short_time
    rows = eb.rows()
    assert len(rows) == 8
    assert {r[0] for r in rows} == {"single_qubit", "n_qubits", "local_t_star"}
    assert not error_budget(2, 0.5, 1.0, t=3.0).short_time


def test_invalid_inputs():
    with pytest.raises(ValueError):
        error_budget(0, 0.5, 1.0)
    with pytest.raises(ValueError):
        error_budget(1, -0.5, 1.0)
