"""
Correlation Statistics
PLCC (con ajuste logístico de 5 parámetros), SRCC, KRCC, RMSE y ACC
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import stats
from scipy.special import expit

from src.modules.errors import ArgumentError, DegenerateInputError

logger = logging.getLogger(__name__)

N_RESTARTS = 5
MAX_ITER = 500


def logistic5(x: np.ndarray, beta: Sequence[float]) -> np.ndarray:
    """f(x) = β1·(0.5 − 1/(1+exp(β2(x−β3)))) + β4·x + β5"""
    b1, b2, b3, b4, b5 = beta
    return b1 * (0.5 - expit(-b2 * (x - b3))) + b4 * x + b5


def _jacobian(x: np.ndarray, beta: np.ndarray) -> np.ndarray:
    b1, b2, b3, _, _ = beta
    s = expit(-b2 * (x - b3))
    ds = s * (1.0 - s)
    return np.column_stack([
        0.5 - s,
        b1 * ds * (x - b3),
        -b1 * ds * b2,
        x,
        np.ones_like(x),
    ])


def _cost(x, y, beta) -> float:
    r = logistic5(x, beta) - y
    return float(r @ r)


@dataclass
class LogisticFit:
    beta: np.ndarray
    fitted: np.ndarray
    residual: float
    history: List[float] = field(default_factory=list)


def _levenberg_marquardt(x, y, beta0, max_iter=MAX_ITER):
    """
    Gauss–Newton amortiguado; sólo se aceptan pasos que reducen el coste
    Returns: (beta, historial de costes aceptados)
    """
    beta = np.array(beta0, dtype=np.float64)
    cost = _cost(x, y, beta)
    history = [cost]
    damping = 1e-3

    for _ in range(max_iter):
        r = logistic5(x, beta) - y
        jac = _jacobian(x, beta)
        jtj = jac.T @ jac
        grad = jac.T @ r
        accepted = False
        while damping < 1e12:
            lhs = jtj + damping * (np.diag(np.diag(jtj)) + 1e-12 * np.eye(5))
            try:
                step = np.linalg.solve(lhs, -grad)
            except np.linalg.LinAlgError:
                damping *= 4.0
                continue
            candidate = beta + step
            new_cost = _cost(x, y, candidate)
            if np.isfinite(new_cost) and new_cost < cost:
                improvement = cost - new_cost
                beta, cost = candidate, new_cost
                history.append(cost)
                damping = max(damping / 3.0, 1e-12)
                accepted = True
                break
            damping *= 4.0
        if not accepted or improvement <= 1e-15 * max(cost, 1e-30):
            break
    return beta, history


def _polish(x, y, beta):
    """Re-resolver (β1, β4, β5) por mínimos cuadrados con (β2, β3) fijos"""
    s = expit(-beta[1] * (x - beta[2]))
    design = np.column_stack([0.5 - s, x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return np.array([coef[0], beta[1], beta[2], coef[1], coef[2]])


def _linear_candidate(x, y, beta):
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return np.array([0.0, beta[1], beta[2], coef[0], coef[1]])


def logistic_fit(pred: Sequence[float], mos: Sequence[float], restarts: int = N_RESTARTS, seed: int = 0) -> LogisticFit:
    """
    Ajuste logístico de 5 parámetros (LM con reinicios aleatorios deterministas)

    Args:
        pred: Predicciones del modelo
        mos: MOS de referencia
        restarts: Número de inicializaciones (la primera es la canónica)
        seed: Semilla de los reinicios

    Returns:
        LogisticFit con β1..β5, valores ajustados y residuo RMS
    """
    x = np.asarray(pred, dtype=np.float64)
    y = np.asarray(mos, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ArgumentError(f"pred/mos must be equal-length vectors, got {x.shape} and {y.shape}")
    if x.size < 5:
        raise ArgumentError(f"logistic fit needs at least 5 points, got {x.size}")
    if np.ptp(x) == 0.0:
        raise DegenerateInputError("logistic fit on constant predictions")

    spread = float(np.std(x))
    base = np.array([np.ptp(y), 1.0 / spread, np.mean(x), 0.0, np.mean(y)])
    rng = np.random.default_rng(seed)

    best_beta, best_history, best_cost = None, [], np.inf
    for attempt in range(max(1, restarts)):
        init = base.copy()
        if attempt > 0:
            jitter = rng.normal(size=5)
            init[0] *= 1.0 + 0.5 * jitter[0]
            init[1] *= np.exp(0.5 * jitter[1])
            init[2] += 0.5 * spread * jitter[2]
            init[3] += 0.1 * jitter[3]
            init[4] += 0.1 * np.std(y) * jitter[4]
        beta, history = _levenberg_marquardt(x, y, init)
        if history[-1] < best_cost:
            best_beta, best_history, best_cost = beta, history, history[-1]

    # el resultado final es siempre una proyección de mínimos cuadrados con término independiente
    for candidate, strict in ((_polish(x, y, best_beta), False), (_linear_candidate(x, y, best_beta), True)):
        cost = _cost(x, y, candidate)
        if cost < best_cost or (not strict and cost <= best_cost):
            best_beta, best_cost = candidate, cost
            best_history = best_history + [cost]

    fitted = logistic5(x, best_beta)
    residual = float(np.sqrt(np.mean((fitted - y) ** 2)))
    logger.debug(f"📊 logistic fit: beta={np.round(best_beta, 4).tolist()} rms={residual:.3e}")
    return LogisticFit(best_beta, fitted, residual, best_history)


def _check_pair(pred, mos, minimum: int = 3):
    x = np.asarray(pred, dtype=np.float64)
    y = np.asarray(mos, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ArgumentError(f"pred/mos must be equal-length vectors, got {x.shape} and {y.shape}")
    if x.size < minimum:
        raise ArgumentError(f"need at least {minimum} points, got {x.size}")
    return x, y


def _check_variance(*arrays):
    for a in arrays:
        if np.ptp(a) == 0.0:
            raise DegenerateInputError("zero variance input")


def plcc(pred, mos, after_logistic: bool = False, fit: Optional[LogisticFit] = None) -> float:
    """
    Pearson; con after_logistic se calcula entre los valores ajustados y el MOS
    """
    x, y = _check_pair(pred, mos)
    _check_variance(x, y)
    if after_logistic:
        x = (fit or logistic_fit(x, y)).fitted
        _check_variance(x)
    return float(stats.pearsonr(x, y)[0])


def srcc(pred, mos) -> float:
    """Spearman con rangos promedio para empates"""
    x, y = _check_pair(pred, mos)
    _check_variance(stats.rankdata(x), stats.rankdata(y))
    return float(stats.spearmanr(x, y)[0])


def krcc(pred, mos) -> float:
    x, y = _check_pair(pred, mos)
    _check_variance(x, y)
    return float(stats.kendalltau(x, y)[0])


def rmse(pred, mos) -> float:
    x, y = _check_pair(pred, mos, minimum=1)
    return float(np.sqrt(np.mean((x - y) ** 2)))


def accuracy(pred_class, true_class) -> float:
    """ACC = N_acc / N_total"""
    p = np.asarray(pred_class)
    t = np.asarray(true_class)
    if p.shape != t.shape:
        raise ArgumentError(f"class vectors differ in length: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise DegenerateInputError("accuracy of an empty set")
    return float(np.mean(p == t))


@dataclass
class CorrelationReport:
    plcc: float
    srcc: float
    beta: List[float]
    fit_residual: float
    krcc: float
    rmse: float
    n: int
    acc: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        report = {"plcc": self.plcc, "srcc": self.srcc}
        if self.acc is not None:
            report["acc"] = self.acc
        report.update({
            "beta": [float(b) for b in self.beta],
            "residual": self.fit_residual,
            "krcc": self.krcc,
            "rmse": self.rmse,
            "n": self.n,
        })
        return report


def correlation_report(pred, mos, pred_class=None, true_class=None, seed: int = 0) -> CorrelationReport:
    """
    Informe completo: PLCC tras logística, SRCC, KRCC, RMSE (tras logística) y ACC opcional
    """
    x, y = _check_pair(pred, mos)
    fit = logistic_fit(x, y, seed=seed)
    acc = accuracy(pred_class, true_class) if pred_class is not None else None
    return CorrelationReport(
        plcc=plcc(x, y, after_logistic=True, fit=fit),
        srcc=srcc(x, y),
        beta=fit.beta.tolist(),
        fit_residual=fit.residual,
        krcc=krcc(x, y),
        rmse=rmse(fit.fitted, y),
        n=int(x.size),
        acc=acc,
    )


def situation_breakdown(pred, mos, situations, names: Optional[Dict[int, str]] = None,
                        pred_class=None, seed: int = 0) -> Dict[str, Dict[str, Any]]:
    """
    Informe por situación de distorsión más la fila global ("overall")
    Grupos con menos de 5 imágenes o degenerados se omiten con un aviso
    """
    x = np.asarray(pred, dtype=np.float64)
    y = np.asarray(mos, dtype=np.float64)
    labels = np.asarray(situations)
    classes = None if pred_class is None else np.asarray(pred_class)
    names = names or {}

    rows: Dict[str, Dict[str, Any]] = {}
    for label in sorted(set(labels.tolist())):
        mask = labels == label
        name = names.get(int(label), str(label))
        try:
            report = correlation_report(
                x[mask], y[mask],
                None if classes is None else classes[mask],
                None if classes is None else labels[mask],
                seed=seed,
            )
            rows[name] = report.to_dict()
        except (ArgumentError, DegenerateInputError) as e:
            logger.warning(f"⚠️ situation {name} skipped: {e}")

    rows["overall"] = correlation_report(x, y, classes, None if classes is None else labels, seed=seed).to_dict()
    return rows
