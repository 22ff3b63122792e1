"""A-priori error estimates for the Markovian, integral and secular equations.

All bounds drop logarithms and O(1) factors; they are orientation marks, not
certified error bars.  Table entries are error rates per relaxation time,
i.e. ``epsilon / (A^2 t)``.
"""
from dataclasses import dataclass, field

import numpy as np

K = 4 * np.pi * np.e      # |rhs| <= K |A|^2


@dataclass
class ErrorBudget:
    n_qubits: int
    A_norm: float
    beta: float
    T_prime: float
    t: float
    af_norm_bound: float
    eps_ave: float
    eps_mkv: float
    eps_born: float
    eps_rwa_opt: float
    short_time: bool
    tables: dict = field(default_factory=dict)

    def rows(self):
        """Flat ``(table, equation, born, other)`` tuples."""
        return [(name, eq, v["born"], v["other"])
                for name, tab in self.tables.items() for eq, v in tab.items()]


def error_budget(n_qubits, A_norm, beta, T_prime=0.3, t=1.0, c=1.0, dim_exponent=1.0,
                 delta_E=None):
    """Error estimates for ``n_qubits`` each coupled with strength ``A_norm``.

    ``delta_E`` is the smallest level spacing seen by the secular
    approximation (default ``1/d^2`` with ``d = 2^n``); ``dim_exponent`` is
    the power ``a`` in the ``d^a`` norm-conversion factor and ``c`` the rate
    in the ``exp(c n)`` growth of the Lindblad error.  ``short_time`` flags
    ``t < beta``, where the Markovian and Born estimates become
    ``|A|^4 t^2``-like and the tables do not apply.
    """
    if n_qubits < 1 or A_norm < 0 or beta < 0 or T_prime < 0 or t < 0:
        raise ValueError("error_budget needs n >= 1 and non-negative A, beta, T', t")
    n, a = n_qubits, A_norm
    d = 2.0 ** n
    if delta_E is None:
        delta_E = 1.0 / d ** 2
    a2 = a * a
    tables = {
        "single_qubit": {
            "lindblad": {"born": a2 * beta, "other": a2 * beta + a},
            "local_me": {"born": a2 * beta, "other": a2 * (beta + T_prime)},
            "integral": {"born": a2 * beta, "other": T_prime * a2},
        },
        "n_qubits": {
            "lindblad": {"born": n ** 2 * a2 * beta,
                         "other": n ** 2 * a2 * beta + n * np.sqrt(n) * np.exp(c * n) * a},
            "local_me": {"born": n ** 2 * a2 * beta, "other": n ** 2 * a2 * (beta + T_prime)},
            "integral": {"born": n ** 2 * a2 * beta, "other": T_prime * n ** 2 * a2},
        },
        "local_t_star": {
            "local_me": {"born": a2 * beta ** 3, "other": a2 * (beta ** 3 + T_prime * beta ** 2)},
            "integral": {"born": a2 * beta ** 3, "other": T_prime * a2 * beta ** 2},
        },
    }
    return ErrorBudget(
        n_qubits=n, A_norm=a, beta=beta, T_prime=T_prime, t=t,
        af_norm_bound=4 * np.sqrt(np.pi) * np.e * a,
        eps_ave=K ** 2 * a ** 4 * T_prime * t,
        eps_mkv=K ** 2 * a ** 4 * beta * t,
        eps_born=a ** 4 * beta * t,
        eps_rwa_opt=K ** 1.5 * a ** 3 * t * np.sqrt(d ** dim_exponent / delta_E),
        short_time=t < beta,
        tables=tables,
    )
