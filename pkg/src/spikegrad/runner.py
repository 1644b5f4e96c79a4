"""Experiment runners behind the CLI subcommands.

Every run writes its fully resolved config echo next to the outputs; metrics
go to a line-delimited JSON stream (one self-describing record per epoch).
Wallclock timings are written to a sidecar stream so that the metrics file
itself is byte-identical across replays of the same config and seed.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as config_mod
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ConfigError, RunConfig
from .data import Dataset, batches, generate_synthetic, load_idx
from .gradcheck import run_gradcheck as _gradcheck
from .graph import MODE_SPIKING, backward, forward, init_params
from .msg import generate_masks  # noqa: F401  (re-exported for harness use)
from .optim import (OptimizerState, Schedule, evaluate, schedule_lr,
                    softmax_cross_entropy, train_epoch)
from .two import TemporalFactors, freeze

METRICS_FILE = "metrics.jsonl"
TIMING_FILE = "timing.jsonl"
CONFIG_ECHO_FILE = "config_echo.txt"
CHECKPOINT_FILE = "final.ckpt"


def load_datasets(cfg: RunConfig) -> tuple[Dataset, Dataset]:
    if cfg["data.source"] == "idx":
        for key in ("data.train_images", "data.train_labels",
                    "data.test_images", "data.test_labels"):
            if not cfg[key]:
                raise ConfigError(f"config key {key}: required for idx source")
        train = load_idx(cfg["data.train_images"], cfg["data.train_labels"],
                         normalize=cfg["data.normalize"], dtype=cfg.dtype)
        test = load_idx(cfg["data.test_images"], cfg["data.test_labels"],
                        normalize=cfg["data.normalize"], dtype=cfg.dtype)
    else:
        spec = cfg.synth_spec()
        train = generate_synthetic(spec, cfg["synth.n_train"], "train",
                                   dtype=cfg.dtype)
        test = generate_synthetic(spec, cfg["synth.n_test"], "test",
                                  dtype=cfg.dtype)
    d = train.inputs.shape[-1]
    sizes = cfg["network.layer_sizes"]
    if d != sizes[0]:
        raise ConfigError(
            f"config key network.layer_sizes: input dim {sizes[0]} != data dim {d}")
    if train.num_classes > sizes[-1]:
        raise ConfigError(
            f"config key network.layer_sizes: output dim {sizes[-1]} < "
            f"{train.num_classes} classes")
    return train, test


def _write_echo(cfg: RunConfig, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / CONFIG_ECHO_FILE).write_text(config_mod.echo_text(cfg.resolved))


def run_train(cfg: RunConfig, out_dir=None) -> dict:
    out_dir = Path(out_dir if out_dir is not None else cfg["out_dir"])
    _write_echo(cfg, out_dir)
    train_data, test_data = load_datasets(cfg)

    spec = cfg.network_spec()
    seed = cfg["seed"]
    params = init_params(spec, seed, dtype=cfg.dtype)
    factors = TemporalFactors.uniform(spec.timesteps, beta=cfg["two.beta"])
    opt = cfg.optimizer_state()
    epochs = cfg["schedule.epochs"]
    batch_size = cfg["batch_size"]
    n_batches = -(-train_data.n // batch_size)
    schedule = Schedule(lr_max=cfg["optim.lr"], lr_min=cfg["schedule.lr_min"],
                        total_steps=max(1, epochs * n_batches))
    msg_cfg = cfg.msg_config()

    last_test_acc = None
    with open(out_dir / METRICS_FILE, "w") as mfh, \
            open(out_dir / TIMING_FILE, "w") as tfh:
        for epoch in range(epochs):
            lr = schedule_lr(schedule, min(opt.step, schedule.total_steps))
            factors, train_metrics = train_epoch(
                spec, params, msg_cfg, factors, opt, schedule, train_data,
                batch_size, epoch, seed, two_enabled=cfg["two.enabled"])
            test_metrics = evaluate(spec, params, freeze(factors), test_data)
            last_test_acc = test_metrics["accuracy"]
            record = {
                "epoch": epoch,
                "lr": lr,
                "train_loss": train_metrics["train_loss"],
                "train_acc": train_metrics["train_acc"],
                "test_acc": test_metrics["accuracy"],
                "per_timestep_test_acc": test_metrics["per_timestep_acc"],
                "factors": factors.f.tolist(),
                "firing_rates": test_metrics["firing_rates"],
            }
            mfh.write(json.dumps(record, sort_keys=True) + "\n")
            tfh.write(json.dumps({
                "epoch": epoch,
                "wall_seconds": train_metrics["wall_seconds"],
            }, sort_keys=True) + "\n")

    factors = freeze(factors)
    save_checkpoint(params, factors, opt, out_dir / CHECKPOINT_FILE,
                    config_digest=cfg.digest())
    return {"out_dir": str(out_dir), "epochs": epochs,
            "final_test_acc": last_test_acc}


def run_eval(cfg: RunConfig, checkpoint_path=None) -> dict:
    path = Path(checkpoint_path if checkpoint_path is not None
                else Path(cfg["out_dir"]) / CHECKPOINT_FILE)
    params, factors, _, digest = load_checkpoint(path)
    if digest != cfg.digest():
        warnings.warn("checkpoint config digest does not match current config")
    if not factors.frozen:
        factors = freeze(factors)
    _, test_data = load_datasets(cfg)
    return evaluate(cfg.network_spec(), params, factors, test_data)


def run_gradcheck(cfg: RunConfig, grad_transform=None) -> dict:
    """64-bit relaxed-mode FD check on a small net derived from the config."""
    spec = cfg.network_spec()
    sizes = spec.layer_sizes
    if int(np.prod([a * b for a, b in zip(sizes[1:], sizes[:-1])])) > 10_000:
        # FD over every entry is quadratic in cost; shrink to a check-sized net.
        spec = replace(spec, layer_sizes=(16, 8, 4))
    return _gradcheck(spec, master_seed=cfg["seed"],
                      grad_transform=grad_transform)


def run_mask_sweep(cfg: RunConfig, p_list: list[float], out_dir=None) -> list:
    out_dir = Path(out_dir if out_dir is not None else cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for p in p_list:
        sub_cfg = RunConfig(config_mod.resolve(cfg.resolved, **{
            "msg.p": p, "out_dir": str(out_dir / f"p_{p:g}")}))
        result = run_train(sub_cfg)
        rows.append((p, result["final_test_acc"]))
    with open(out_dir / "mask_sweep.tsv", "w") as fh:
        fh.write("p\ttest_acc\n")
        for p, acc in rows:
            fh.write(f"{p:g}\t{acc}\n")
    return rows


def gradient_stats(cfg: RunConfig, alpha: float) -> dict:
    """Gradient histogram over the surrogate-bearing (non-output) layers.

    Uses a fixed seeded batch and the seeded initial weights, spiking mode,
    no masking. The output layer is excluded: its weight gradient never
    passes through the surrogate, so it says nothing about surrogate width.
    """
    spec = cfg.network_spec()
    spec = replace(spec, surrogate=replace(spec.surrogate, alpha=alpha))
    params = init_params(spec, cfg["seed"], dtype=cfg.dtype)
    train_data, _ = load_datasets(cfg)
    x, labels = next(batches(train_data, cfg["batch_size"]))

    trace = forward(params, spec, x, MODE_SPIKING)
    y = trace.out_currents.mean(axis=0)
    _, g_y = softmax_cross_entropy(y, labels)
    grad_out = np.broadcast_to(g_y / spec.timesteps,
                               trace.out_currents.shape).astype(g_y.dtype)
    grads = backward(trace, params, spec, grad_out)

    entries = np.concatenate([g.ravel() for g in grads[:-1]])
    counts, edges = np.histogram(entries, bins=50)
    return {
        "alpha": alpha,
        "family": spec.surrogate.family,
        "zero_fraction": float((entries == 0).mean()),
        "total_entries": int(entries.size),
        "bin_edges": edges.tolist(),
        "bin_counts": counts.tolist(),
    }


def run_gradstats(cfg: RunConfig, alpha_list: list[float],
                  out_dir=None) -> list[dict]:
    if not alpha_list:
        raise ConfigError("gradstats needs at least one alpha")
    out_dir = Path(out_dir if out_dir is not None else cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for alpha in alpha_list:
        stats = gradient_stats(cfg, alpha)
        with open(out_dir / f"gradstats_alpha_{alpha:g}.json", "w") as fh:
            json.dump(stats, fh, sort_keys=True, indent=2)
        results.append(stats)
    return results


def run_synth_gen(cfg: RunConfig, out_dir=None) -> Path:
    out_dir = Path(out_dir if out_dir is not None else cfg["out_dir"])
    _write_echo(cfg, out_dir)
    spec = cfg.synth_spec()
    train = generate_synthetic(spec, cfg["synth.n_train"], "train")
    test = generate_synthetic(spec, cfg["synth.n_test"], "test")
    path = out_dir / "synthetic.npz"
    np.savez(path, train_inputs=train.inputs, train_labels=train.labels,
             test_inputs=test.inputs, test_labels=test.labels,
             num_classes=train.num_classes)
    return path
