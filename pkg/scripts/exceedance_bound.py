"""Tabulate P(rho_hat > 1) under the Rice law against its exponential bounds."""

from qtmsradar.detection import prob_exceed_one_bound
from qtmsradar.rice import RhoModel


def main():
    print(f"{'rho':>6} {'N':>8} {'ln P(>1)':>14} {'-N/(1+rho)^2':>14} {'-N/4':>10}")
    for n in (10, 100, 1000, 10_000):
        for rho in (0.0, 0.3, 0.6, 0.9, 0.99):
            b = prob_exceed_one_bound(RhoModel(rho, n))
            print(f"{rho:6.2f} {n:8d} {b.log_exact:14.6g} {b.log_bound:14.6g} {b.log_loose_bound:10.6g}")


if __name__ == "__main__":
    main()
