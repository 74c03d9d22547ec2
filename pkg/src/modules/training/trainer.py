"""
Training Loop
Bucle de entrenamiento multitarea, evaluación y gradient check de extremo a extremo
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from src.modules.errors import ArgumentError, DegenerateInputError
from src.modules.model import BackboneConfig, IQCaption360, ModelConfig, save_checkpoint
from src.modules.numerics import GradCheckResult, backward, check_store_gradients
from src.modules.stats import correlation_report, situation_breakdown
from .config import LossConfig, TrainConfig
from .dataset import ViewportDataset, iterate_batches, read_manifest, split_indices
from .dwa import DwaState, dwa_weights
from .losses import ce_loss, norm_in_norm_loss, total_loss
from .optim import adam_step, cosine_lr

logger = logging.getLogger(__name__)

SITUATION_NAMES = {0: "CnoDist", 1: "CdistR1", 2: "CdistR2", 3: "CdistGl"}


@dataclass
class EpochRecord:
    epoch: int
    l_dspn: float
    l_qspn: float
    l_total: float
    lambdas: List[float]
    lr: float
    val_plcc: Optional[float]
    val_srcc: Optional[float]
    val_acc: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epoch": self.epoch,
            "l_dspn": self.l_dspn,
            "l_qspn": self.l_qspn,
            "l_total": self.l_total,
            "lambda": self.lambdas,
            "lr": self.lr,
            "val_plcc": self.val_plcc,
            "val_srcc": self.val_srcc,
            "val_acc": self.val_acc,
        }


@dataclass
class TrainResult:
    log: List[EpochRecord]
    best_checkpoint: Path
    final_checkpoint: Path
    best_epoch: int
    n_train: int
    n_val: int
    skipped: int = 0
    model: Optional[IQCaption360] = field(default=None, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "best_checkpoint": str(self.best_checkpoint),
            "final_checkpoint": str(self.final_checkpoint),
            "best_epoch": self.best_epoch,
            "n_train": self.n_train,
            "n_val": self.n_val,
            "skipped": self.skipped,
            "epochs": [record.to_dict() for record in self.log],
        }


def predict_arrays(model: IQCaption360, views: np.ndarray, batch_size: int = 32):
    """
    Predicciones sin gradiente en orden

    Returns:
        (scores (N,), probs (N, 4))
    """
    scores, probs = [], []
    for start in range(0, views.shape[0], batch_size):
        result = model.forward(views[start:start + batch_size])
        scores.append(result.score.data.astype(np.float64))
        probs.append(result.probs.data.astype(np.float64))
    return np.concatenate(scores), np.concatenate(probs)


def evaluate(model: IQCaption360, dataset: ViewportDataset, indices: Optional[np.ndarray] = None,
             batch_size: int = 32, seed: int = 0) -> Dict[str, Any]:
    """
    Evaluar PLCC/SRCC (y ACC si la DSPN está activa) sobre un subconjunto

    Returns:
        Dict con "report", "situations" y "predictions"
    """
    indices = np.arange(len(dataset)) if indices is None else np.asarray(indices)
    scores, probs = predict_arrays(model, dataset.views[indices], batch_size)
    mos = dataset.mos[indices]
    truth = dataset.situations[indices]
    pred_class = probs.argmax(axis=1) if model.config.enable_dspn else None

    report = correlation_report(scores, mos, pred_class, truth if pred_class is not None else None, seed=seed)
    breakdown = situation_breakdown(scores, mos, truth, SITUATION_NAMES, pred_class, seed=seed)
    predictions = [
        {"id": dataset.ids[i], "score": float(s), "mos": float(m), "situation": int(t), "pred_situation": int(p.argmax())}
        for i, s, m, t, p in zip(indices, scores, mos, truth, probs)
    ]
    return {"report": report.to_dict(), "situations": breakdown, "predictions": predictions}


class Trainer:
    """
    Entrenador multitarea: DSPN (entropía cruzada) + QSPN (Norm-in-Norm)
    con pesos DWA por época (o fijos) y tasa coseno por época
    """

    def __init__(self, model_config: ModelConfig, loss_cfg: LossConfig, train_cfg: TrainConfig,
                 out_dir: Union[str, Path]):
        self.model_config = model_config
        self.loss_cfg = loss_cfg
        self.train_cfg = train_cfg
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.out_dir / "train_log.jsonl"

    def _lambdas(self, dwa: DwaState) -> np.ndarray:
        if self.loss_cfg.task_weights is not None:
            lambdas = np.array(self.loss_cfg.task_weights, dtype=np.float64)
        else:
            lambdas = dwa_weights(dwa)
        if not self.model_config.enable_dspn:
            lambdas = np.array([0.0, lambdas[1]])
        return lambdas

    def _validate(self, model, dataset, val_idx):
        try:
            report = evaluate(model, dataset, val_idx, self.train_cfg.batch_size, self.train_cfg.seed)["report"]
            return report["plcc"], report["srcc"], report.get("acc")
        except (ArgumentError, DegenerateInputError) as e:
            logger.warning(f"⚠️ validation statistics unavailable: {e}")
            return None, None, None

    def fit(self, dataset: ViewportDataset) -> TrainResult:
        """
        Entrenar sobre un dataset ya cargado

        Returns:
            TrainResult con el log por época y los checkpoints best/final
        """
        cfg = self.train_cfg
        if len(dataset) < 2 * cfg.batch_size:
            raise ArgumentError(f"need at least {2 * cfg.batch_size} images for batch size {cfg.batch_size}, got {len(dataset)}")

        train_idx, val_idx = split_indices(len(dataset), cfg.train_fraction, cfg.seed)
        model = IQCaption360(self.model_config).init_params(cfg.seed)
        dwa = DwaState(T=self.loss_cfg.dwa_t)
        best_path, final_path = self.out_dir / "best.iqc", self.out_dir / "final.iqc"
        self.log_path.write_text("")

        logger.info(f"🔄 Training: {train_idx.size} train / {val_idx.size} val, {cfg.epochs} epochs")
        log, best_srcc, best_epoch = [], -np.inf, -1
        for epoch in range(cfg.epochs):
            lr = cosine_lr(epoch, cfg)
            lambdas = self._lambdas(dwa)
            sums, count = np.zeros(3), 0

            for batch in iterate_batches(train_idx, cfg.batch_size, cfg.seed, epoch):
                model.store.zero_grad()
                out = model.forward(dataset.views[batch])
                l_dspn = ce_loss(out.probs, dataset.situations[batch], self.loss_cfg)
                l_qspn = norm_in_norm_loss(out.score, dataset.mos[batch], self.loss_cfg)
                loss = total_loss(l_dspn, l_qspn, lambdas)
                backward(loss, model.store)
                adam_step(model.store, lr)
                sums += batch.size * np.array([l_dspn.item(), l_qspn.item(), loss.item()])
                count += batch.size

            means = sums / count
            dwa.update(means[:2])
            plcc, srcc, acc = self._validate(model, dataset, val_idx)
            record = EpochRecord(epoch, float(means[0]), float(means[1]), float(means[2]),
                                 [float(v) for v in lambdas], lr, plcc, srcc, acc)
            log.append(record)
            with open(self.log_path, 'a', encoding='utf-8') as f:
                f.write(json.dumps(record.to_dict()) + "\n")
            logger.info(f"📊 epoch {epoch}: L_dspn={means[0]:.4f} L_qspn={means[1]:.4f} "
                        f"lambda={np.round(lambdas, 3).tolist()} lr={lr:.2e} val_srcc={srcc}")

            if srcc is not None and srcc > best_srcc:
                best_srcc, best_epoch = srcc, epoch
                save_checkpoint(model, best_path, {"epoch": epoch, "val_srcc": srcc})

        save_checkpoint(model, final_path, {"epoch": cfg.epochs - 1})
        if best_epoch < 0:
            save_checkpoint(model, best_path, {"epoch": cfg.epochs - 1})
            best_epoch = cfg.epochs - 1

        logger.info(f"✅ Training finished: best epoch {best_epoch} (val SRCC {best_srcc:.4f})")
        return TrainResult(log, best_path, final_path, best_epoch, int(train_idx.size), int(val_idx.size),
                           dataset.skipped, model)


def train(manifest: Union[str, Path], model_config: ModelConfig, loss_cfg: LossConfig,
          train_cfg: TrainConfig, out_dir: Union[str, Path]) -> TrainResult:
    """Entrenar desde un manifest CSV"""
    model = IQCaption360(model_config)
    dataset = ViewportDataset(read_manifest(manifest), model.plan)
    return Trainer(model_config, loss_cfg, train_cfg, out_dir).fit(dataset)


def gradcheck_config() -> ModelConfig:
    """Configuración mínima para el gradient check de extremo a extremo"""
    backbone = BackboneConfig(depths=(1, 1, 1, 1), dims=(4, 4, 4, 4), heads=(1, 1, 1, 1), kernel=3, embed_dim=4)
    return ModelConfig(backbone=backbone, m=4, k=2, offset_deg=90.0, size=32)


def model_gradcheck(config: Optional[ModelConfig] = None, seed: int = 0, tolerance: float = 1e-6,
                    entries_per_tensor: Optional[int] = 3, lambdas: Sequence[float] = (1.0, 1.0)) -> GradCheckResult:
    """
    Gradient check de L_total respecto de todos los parámetros (doble precisión)
    """
    config = config or gradcheck_config()
    model = IQCaption360(config, np.float64).init_params(seed)
    rng = np.random.default_rng(seed)
    batch = 3
    views = rng.uniform(size=(batch, config.m, config.size, config.size, 3))
    mos = rng.uniform(1.0, 3.0, size=batch)
    situations = rng.integers(0, 4, size=batch)
    loss_cfg = LossConfig()

    def loss_fn():
        out = model.forward(views)
        return total_loss(ce_loss(out.probs, situations, loss_cfg), norm_in_norm_loss(out.score, mos, loss_cfg), lambdas)

    return check_store_gradients("model_end_to_end", loss_fn, model.store, tolerance,
                                 entries_per_tensor=entries_per_tensor, seed=seed)
