"""Monte Carlo campaigns, reference-table and ROC reports, and I/Q file ingestion.

Every trial ``i`` of a campaign draws from ``RngStream(master_seed, i)``, so
results are identical whatever the worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .covariance import ModelParams, RadarFamily, build_cov
from .detection import EmpiricalRoc, empirical_roc, pd_at_threshold, threshold_for_pfa
from .errors import ConvergenceError, DataError, DegenerateInput, InvalidParams
from .estimator import closed_form_batch, rho_series
from .rice import RhoModel, rho_model_params, rice_mle
from .sampling import RngStream, draw_snapshots, draw_wishart_sample_cov, sample_covariance

PATHS = ("wishart", "snapshot")

# (rho, N) -> (mean rho_hat, std rho_hat, alpha_hat, beta_hat); reference
# 50 000-trial values for sigma1 = 0.5, sigma2 = 2, phi = 0.
TABLE_I = {
    (0.0, 10_000): (0.008855, 0.004637, 0.002150, 0.006902),
    (0.0, 50_000): (0.003964, 0.002075, 0.000694, 0.003126),
    (0.0, 100_000): (0.002803, 0.001469, 0.000266, 0.002230),
    (0.005, 10_000): (0.009982, 0.005150, 0.005180, 0.007047),
    (0.005, 50_000): (0.006130, 0.002747, 0.005017, 0.003158),
    (0.005, 100_000): (0.005544, 0.002091, 0.005005, 0.002242),
    (0.01, 10_000): (0.012798, 0.005981, 0.009939, 0.007098),
    (0.01, 50_000): (0.010510, 0.003067, 0.009995, 0.003160),
    (0.01, 100_000): (0.010261, 0.002211, 0.010006, 0.002241),
    (0.05, 10_000): (0.050512, 0.007055, 0.050006, 0.007091),
    (0.05, 50_000): (0.050094, 0.003149, 0.049995, 0.003152),
    (0.05, 100_000): (0.050049, 0.002228, 0.050000, 0.002229),
    (0.1, 10_000): (0.100216, 0.006998, 0.099970, 0.007006),
    (0.1, 50_000): (0.100057, 0.003133, 0.100008, 0.003134),
    (0.1, 100_000): (0.100008, 0.002214, 0.099984, 0.002214),
    (0.5, 10_000): (0.500039, 0.005294, 0.500011, 0.005294),
    (0.5, 50_000): (0.499989, 0.002373, 0.499983, 0.002373),
    (0.5, 100_000): (0.500008, 0.001669, 0.500005, 0.001669),
    (0.8, 10_000): (0.799989, 0.002536, 0.799985, 0.002536),
    (0.8, 50_000): (0.799996, 0.001140, 0.799995, 0.001140),
    (0.8, 100_000): (0.800005, 0.000805, 0.800005, 0.000805),
    (0.9, 10_000): (0.900005, 0.001341, 0.900004, 0.001341),
    (0.9, 50_000): (0.899998, 0.000601, 0.899998, 0.000601),
    (0.9, 100_000): (0.899999, 0.000425, 0.899999, 0.000425),
    (0.99, 10_000): (0.990001, 0.000141, 0.990001, 0.000141),
    (0.99, 50_000): (0.990000, 0.000063, 0.990000, 0.000063),
    (0.99, 100_000): (0.990000, 0.000044, 0.990000, 0.000044),
}

DESK_ROWS = [(rho, n) for rho in (0.0, 0.01, 0.1, 0.5, 0.99) for n in (10_000, 100_000)]
TABLE_SIGMA1, TABLE_SIGMA2, TABLE_PHI = 0.5, 2.0, 0.0


@dataclass
class CampaignConfig:
    params: ModelParams
    n: int
    trials: int = 5000
    family: RadarFamily = RadarFamily.QTMS
    path: str = "wishart"
    master_seed: int = 0
    outputs: Path | None = None
    workers: int = 1
    histogram_bins: str | int = "fd"

    def __post_init__(self):
        self.family = RadarFamily.parse(self.family)
        if not isinstance(self.params, ModelParams):
            raise InvalidParams("params must be a ModelParams")
        if int(self.trials) < 1:
            raise InvalidParams("trials must be >= 1")
        if int(self.n) < 1:
            raise InvalidParams("n must be >= 1")
        if self.path not in PATHS:
            raise InvalidParams(f"path must be one of {PATHS}, got {self.path!r}")
        if self.path == "wishart" and int(self.n) < 4:
            raise InvalidParams("the Wishart path needs n >= 4")
        self.trials = int(self.trials)
        self.n = int(self.n)
        self.workers = max(1, int(self.workers))
        if self.outputs is not None:
            self.outputs = Path(self.outputs)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            **self.params.as_dict(),
            "n": self.n,
            "trials": self.trials,
            "path": self.path,
            "master_seed": self.master_seed,
            "outputs": None if self.outputs is None else str(self.outputs),
            "workers": self.workers,
            "histogram_bins": self.histogram_bins,
        }


@dataclass
class Summary:
    mean: float
    std: float | None
    alpha_hat: float | None
    beta_hat: float | None
    alpha_pred: float | None
    beta_pred: float | None


def summarize(rho_hats, rho: float | None, n: int) -> Summary:
    """Summary statistics, recomputable from ``rho_hats`` alone.

    ``std`` is the sample standard deviation (``ddof=1``) and needs two
    values; the Rice MLE needs ten.
    """
    x = np.asarray(rho_hats, dtype=float)
    std = float(np.std(x, ddof=1)) if x.size >= 2 else None
    alpha_hat = beta_hat = None
    if x.size >= 10 and not np.all(x == x[0]):
        try:
            fit = rice_mle(x)
            alpha_hat, beta_hat = fit.alpha, fit.beta
        except (ConvergenceError, DegenerateInput):
            pass
    alpha_pred = beta_pred = None
    if rho is not None and 0.0 <= rho < 1.0:
        pred = rho_model_params(RhoModel(rho, n))
        alpha_pred, beta_pred = pred.alpha, pred.beta
    return Summary(float(np.mean(x)), std, alpha_hat, beta_hat, alpha_pred, beta_pred)


@dataclass
class CampaignResult:
    rho_hats: np.ndarray
    summary: Summary
    master_seed: int
    config: dict = field(default_factory=dict)


def _trial_matrix(cov, cfg: CampaignConfig, index: int) -> np.ndarray:
    stream = RngStream(cfg.master_seed, index)
    if cfg.path == "wishart":
        return draw_wishart_sample_cov(cov, cfg.n, stream).matrix
    return sample_covariance(draw_snapshots(cov, cfg.n, stream)).matrix


def _chunk_matrices(cov, cfg, lo, hi):
    return np.stack([_trial_matrix(cov, cfg, i) for i in range(lo, hi)])


def campaign_rho_hats(cfg: CampaignConfig) -> np.ndarray:
    cov = build_cov(cfg.params, cfg.family)
    chunk = max(1, math.ceil(cfg.trials / (4 * cfg.workers)))
    bounds = [(lo, min(lo + chunk, cfg.trials)) for lo in range(0, cfg.trials, chunk)]
    if cfg.workers == 1:
        parts = [_chunk_matrices(cov, cfg, lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(lambda b: _chunk_matrices(cov, cfg, *b), bounds))
    mats = np.concatenate(parts)
    return closed_form_batch(mats, cfg.family)[2]


def histogram(rho_hats, bins="fd"):
    counts, edges = np.histogram(np.asarray(rho_hats, dtype=float), bins=bins)
    return counts, edges


def write_campaign(result: CampaignResult, outdir, bins="fd") -> Path:
    """Write ``config.json``, ``rho_hats.csv``, ``summary.json``, ``histogram.csv``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.json").write_text(json.dumps(result.config, indent=2) + "\n")
    io.write_rho_csv(outdir / "rho_hats.csv", result.rho_hats)
    summary = {**asdict(result.summary), "master_seed": result.master_seed,
               "trials": int(result.rho_hats.size)}
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    if result.rho_hats.size >= 2:
        counts, edges = histogram(result.rho_hats, bins)
        with open(outdir / "histogram.csv", "w") as fh:
            fh.write("bin_lo,bin_hi,count\n")
            for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                fh.write(f"{lo!r},{hi!r},{int(c)}\n")
    return outdir


def run_campaign(cfg: CampaignConfig) -> CampaignResult:
    """Draw ``trials`` sample covariances, fit each, and summarize ``rho_hat``."""
    rho_hats = campaign_rho_hats(cfg)
    summary = summarize(rho_hats, cfg.params.rho, cfg.n)
    result = CampaignResult(rho_hats, summary, cfg.master_seed, cfg.to_dict())
    if cfg.outputs is not None:
        write_campaign(result, cfg.outputs, cfg.histogram_bins)
    return result


# -- ingestion ---------------------------------------------------------------

@dataclass
class IngestResult:
    rho_hats: np.ndarray
    summary: Summary
    window: int
    rows: int
    windows: int
    note: str = ""

    @property
    def rho_mle(self) -> float | None:
        return self.summary.alpha_hat

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "window": self.window,
            "windows": self.windows,
            **asdict(self.summary),
            "note": self.note,
        }


def analyze_iq(records, window: int, family=RadarFamily.QTMS) -> IngestResult:
    """``rho_hat`` per non-overlapping window, plus a Rice MLE of those values.

    The MLE's ``alpha`` is the estimate of the true correlation.  With fewer
    than ten windows only the raw values are returned.
    """
    x = np.asarray(records, dtype=float)
    if x.ndim != 2 or x.shape[1] != 4:
        raise DataError(f"records must have shape (n, 4), got {x.shape}")
    if x.shape[0] < window:
        raise DataError(f"{x.shape[0]} rows is less than one window of {window}")
    rho_hats = rho_series(x, window, family)
    summary = summarize(rho_hats, None, window)
    note = ""
    if rho_hats.size < 10:
        note = f"only {rho_hats.size} window(s): Rice MLE skipped (needs >= 10)"
    return IngestResult(rho_hats, summary, int(window), int(x.shape[0]), int(rho_hats.size), note)


def ingest_iq(path, window: int, family=RadarFamily.QTMS) -> IngestResult:
    return analyze_iq(io.read_snapshots_csv(path), window, family)


# -- reports -----------------------------------------------------------------

@dataclass
class TableRow:
    rho: float
    n: int
    mean: float
    std: float | None
    alpha_hat: float | None
    beta_hat: float | None
    alpha_pred: float | None
    beta_pred: float | None
    mean_ok: bool | None = None
    std_ok: bool | None = None

    @property
    def passed(self) -> bool:
        return self.mean_ok is not False and self.std_ok is not False


def compare_to_table(row: TableRow, trials: int, std_rtol: float = 0.10, mean_nse: float = 3.0):
    ref = TABLE_I.get((float(row.rho), int(row.n)))
    if ref is None or row.std is None:
        return row
    ref_mean, ref_std = ref[0], ref[1]
    se = row.std / math.sqrt(trials)
    row.mean_ok = abs(row.mean - ref_mean) <= mean_nse * se
    row.std_ok = abs(row.std - ref_std) <= std_rtol * ref_std
    return row


def table1_report(rows, trials: int = 5000, seed: int = 0, path: str = "wishart",
                  workers: int = 1, std_rtol: float = 0.10) -> list[TableRow]:
    """Re-run reference-table rows and compare mean/std of ``rho_hat`` with the tabulated values."""
    out = []
    for k, (rho, n) in enumerate(rows):
        params = ModelParams(TABLE_SIGMA1, TABLE_SIGMA2, rho, TABLE_PHI)
        cfg = CampaignConfig(params, n, trials, RadarFamily.QTMS, path,
                             master_seed=seed + k, workers=workers)
        s = run_campaign(cfg).summary
        row = TableRow(float(rho), int(n), s.mean, s.std, s.alpha_hat, s.beta_hat,
                       s.alpha_pred, s.beta_pred)
        out.append(compare_to_table(row, trials, std_rtol))
    return out


TABLE_COLUMNS = ("rho", "N", "mean", "std", "alpha_hat", "beta_hat", "alpha_pred", "beta_pred",
                 "status")


def format_table(rows) -> str:
    def fmt(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.6f}"
        return str(v)

    lines = [",".join(TABLE_COLUMNS)]
    for r in rows:
        if r.mean_ok is None:
            status = "n/a"
        else:
            status = "pass" if r.passed else "FAIL"
        lines.append(",".join(fmt(v) for v in (r.rho, r.n, r.mean, r.std, r.alpha_hat, r.beta_hat,
                                               r.alpha_pred, r.beta_pred)) + "," + status)
    return "\n".join(lines) + "\n"


@dataclass
class RocReport:
    model: RhoModel
    p_fa_nominal: np.ndarray
    thresholds: np.ndarray
    p_d_analytic: np.ndarray
    empirical: EmpiricalRoc
    envelope_pd: np.ndarray
    envelope_pfa: np.ndarray
    max_dev_pd: float
    max_dev_pfa: float

    @property
    def within_envelope(self) -> bool:
        dev_pd = np.abs(self.empirical.p_d - self.p_d_analytic)
        dev_fa = np.abs(self.empirical.p_fa - self.p_fa_nominal)
        return bool(np.all(dev_pd <= self.envelope_pd) and np.all(dev_fa <= self.envelope_pfa))


def binomial_envelope(p, count: int, nsigma: float = 3.0):
    """``nsigma`` binomial standard errors plus one count of discreteness."""
    p = np.asarray(p, dtype=float)
    return nsigma * np.sqrt(p * (1.0 - p) / count) + 1.0 / count


def report_pfa_grid(trials: int, points: int = 40) -> np.ndarray:
    lowest = max(1e-7, 10.0 / trials)
    return np.logspace(math.log10(lowest), 0.0, points + 1)[:-1]


def roc_report(m: RhoModel, trials: int = 5000, seed: int = 0, grid=None,
               path: str = "wishart", workers: int = 1) -> RocReport:
    """Empirical ROC from simulated null/alternative campaigns against the analytic curve.

    Both are evaluated at the thresholds ``T(p_fa)`` of the nominal grid.
    """
    if trials < 100:
        raise InvalidParams("roc_report needs trials >= 100")
    grid = report_pfa_grid(trials) if grid is None else np.asarray(grid, dtype=float)
    thresholds = np.atleast_1d(threshold_for_pfa(grid, m.n))

    def campaign(rho, master_seed):
        params = ModelParams(TABLE_SIGMA1, TABLE_SIGMA2, rho, TABLE_PHI)
        cfg = CampaignConfig(params, m.n, trials, RadarFamily.QTMS, path, master_seed,
                             workers=workers)
        return campaign_rho_hats(cfg)

    null = campaign(0.0, seed)
    alt = campaign(m.rho, seed + 1)
    emp = empirical_roc(null, alt, thresholds)
    pd = np.atleast_1d(pd_at_threshold(thresholds, m))
    env_pd = binomial_envelope(pd, alt.size)
    env_fa = binomial_envelope(grid, null.size)
    return RocReport(m, grid, thresholds, pd, emp, env_pd, env_fa,
                     float(np.max(np.abs(emp.p_d - pd))),
                     float(np.max(np.abs(emp.p_fa - grid))))
