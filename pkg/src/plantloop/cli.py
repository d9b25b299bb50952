"""Command-line interface.

Every subcommand reads a JSON config file (see config.py for the schema) and
writes CSV/JSON artifacts; seeds are explicit so each stage reproduces
bit-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .analytics import ParamRange, coverage_report, sensitivity_scan, smbo_optimize
from .diagnosis import DiagnosisModel, evaluate_dtd, noise_study, train_dtd
from .plant import Simulator
from .prognosis import PrognosisModel, replay_closed_loop, train_dtp
from .scenario import Database, generate_database, split_database
from .session import batch_evaluate, campaign_to_csv, default_campaign_grid, run_workflow
from .strategy import build_reference_table


def _load_db(path: str) -> Database:
    return Database.load(path)


def cmd_datagen(args) -> int:
    doc = cfgmod.load_document(args.spec)
    spec = cfgmod.issue_space(doc)
    params = cfgmod.plant_params(doc)
    db = generate_database(spec, params, seed=args.seed, parallelism=args.jobs)
    out = db.save(args.out)
    print(f"wrote {len(db)} transients to {out}")
    return 0


def cmd_train_dtd(args) -> int:
    doc = cfgmod.load_document(args.config) if args.config else {}
    train_cfg, extras = cfgmod.train_config(doc)
    db = _load_db(args.db)
    model = train_dtd(db, train_cfg, variant=args.variant or extras["variant"],
                      hidden_size=extras["hidden_size"],
                      num_layers=extras["num_layers"],
                      window_stride=extras["window_stride"])
    model.save(args.out)
    print(f"saved diagnosis model to {args.out}")
    print(json.dumps(model.evaluation.to_json(), indent=1))
    return 0


def cmd_train_dtp(args) -> int:
    doc = cfgmod.load_document(args.config) if args.config else {}
    train_cfg, extras = cfgmod.train_config(doc)
    db = _load_db(args.db)
    model = train_dtp(db, train_cfg, hidden_size=extras["hidden_size"],
                      num_layers=extras["num_layers"],
                      window_stride=extras["window_stride"])
    model.save(args.out)
    print(f"saved prognosis model to {args.out}")
    print(json.dumps(model.evaluation.to_json(), indent=1))
    return 0


def cmd_eval_dtd(args) -> int:
    model = DiagnosisModel.load(args.model)
    db = _load_db(args.db)
    if args.noise_study:
        rows = noise_study(model, db, c=args.noise, seed=args.seed)
        for name, rec in rows.items():
            print(f"noise on {name}: rmse {rec.rmse_per_output}")
    else:
        rec = evaluate_dtd(model, db, args.noise if args.noise else None,
                           seed=args.seed)
        print(json.dumps(rec.to_json(), indent=1))
    return 0


def cmd_eval_dtp(args) -> int:
    model = PrognosisModel.load(args.model)
    db = _load_db(args.db)
    rep = replay_closed_loop(model, db, t_rcmd=args.t_rcmd, warmup=args.warmup)
    print(json.dumps({"closed_loop_rmse": rep["rmse"]}, indent=1))
    return 0


def cmd_coverage(args) -> int:
    ref = _load_db(args.reference)
    features = args.features.split(",")
    targets = {}
    for spec in args.target:
        name, _, path = spec.partition("=")
        db = _load_db(path or name)
        targets[name] = {f: db.feature_matrix([f]).ravel() for f in features}
    ref_feats = {f: ref.feature_matrix([f]).ravel() for f in features}
    report = coverage_report(ref_feats, targets, features)
    lines = ["database,aggregate_sym_kl,aggregate_hellinger_sq"]
    for name in targets:
        lines.append(f"{name},{report.aggregate_sym_kl[name]:.6g},"
                     f"{report.aggregate_hellinger[name]:.6g}")
    text = "\n".join(lines)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def _parse_space(doc: dict) -> dict:
    space = {}
    for name, d in doc.items():
        space[name] = ParamRange(lo=d["lo"], hi=d["hi"],
                                 integer=d.get("integer", False),
                                 log_scale=d.get("log_scale", False))
    return space


def _dtp_objective(db: Database, base_extras: dict):
    from .neural import TrainConfig

    def objective(params: dict) -> float:
        cfg = TrainConfig(
            sequence_length=int(params.get("sequence_length", 14)),
            batch_size=int(params.get("batch_size", 512)),
            learning_rate=float(params.get("learning_rate", 0.001)),
            epochs_max=int(params.get("epochs_max", 30)),
            validation_patience=int(params.get("validation_patience", 40)),
            early_stop_patience=int(params.get("early_stop_patience", 40)),
            l2_weight=float(params.get("l2_weight", 0.0)),
            seed=int(params.get("seed", 0)))
        model = train_dtp(db, cfg,
                          hidden_size=int(params.get("hidden_size", 30)),
                          num_layers=int(params.get("num_layers", 2)),
                          window_stride=base_extras.get("window_stride", 1))
        return model.evaluation.rmse_per_output["pfcl_temp"]

    return objective


def cmd_sensitivity(args) -> int:
    doc = cfgmod.load_document(args.config)
    space = _parse_space(doc["space"])
    defaults = doc.get("defaults", {})
    db = _load_db(args.db)
    objective = _dtp_objective(db, doc.get("training", {}))
    report = sensitivity_scan(space, objective, defaults,
                              n_samples=args.samples, seed=args.seed)
    lines = ["parameter,pcc,strong"]
    for name in report.parameters:
        lines.append(f"{name},{report.pcc[name]:.4f},{report.strong[name]}")
    text = "\n".join(lines)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def cmd_hyperopt(args) -> int:
    doc = cfgmod.load_document(args.config)
    space = _parse_space(doc["space"])
    db = _load_db(args.db)
    objective = _dtp_objective(db, doc.get("training", {}))
    result = smbo_optimize(objective, space, n_trials=args.trials, seed=args.seed,
                           defaults=doc.get("defaults"))
    print(json.dumps({"best_params": result.best_params,
                      "best_objective": result.best_objective,
                      "comparison": result.comparison}, indent=1))
    if args.out:
        lines = ["trial,objective," + ",".join(sorted(space))]
        for t in result.trials:
            vals = ",".join(f"{t.params[n]:.6g}" for n in sorted(space))
            obj = "failed" if t.failed else f"{t.objective:.6g}"
            lines.append(f"{t.number},{obj},{vals}")
        Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def _load_models(args):
    return DiagnosisModel.load(args.dtd), PrognosisModel.load(args.dtp)


def cmd_demo(args) -> int:
    doc = cfgmod.load_document(args.config) if args.config else {}
    cfg = cfgmod.session_config(doc)
    dtd, dtp = _load_models(args)
    if args.reference_table:
        from .strategy import ReferenceTable
        cfg.reference_table = ReferenceTable.load_csv(args.reference_table)
    result = run_workflow(cfg, dtd, dtp)
    print(f"session finished in phase {result.phase.value}; "
          f"max realized fuel temperature {result.realized_max_pfcl:.1f} degC")
    for r in result.discrepancy_reports:
        print(f"  check at {r.t_ck:g}s: zeta_power={r.zeta_power:.4f} "
              f"zeta_pfcl={r.zeta_pfcl:.4f} -> {r.verdict}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        times = result.observed_times
        cols = result.observed
        lines = ["time_s," + ",".join(cols)]
        for i in range(len(times)):
            lines.append(f"{times[i]:.17g}," +
                         ",".join(f"{cols[k][i]:.17g}" for k in cols))
        (out / "observed.csv").write_text("\n".join(lines) + "\n")
        if result.expected is not None:
            exp = result.expected
            lines = ["time_s," + ",".join(exp["values"])]
            for i in range(len(exp["times"])):
                lines.append(f"{exp['times'][i]:.17g}," + ",".join(
                    f"{exp['values'][k][i]:.17g}" for k in exp["values"]))
            (out / "expected.csv").write_text("\n".join(lines) + "\n")
        if result.recommendation is not None:
            grid = result.recommendation.reward_grid
            lines = ["tau2_end,t_trip,total_reward"]
            for i, t2 in enumerate(grid["tau2_values"]):
                for j, tt in enumerate(grid["t_trip_values"]):
                    lines.append(f"{t2:.17g},{tt:.17g},{grid['totals'][i][j]:.17g}")
            (out / "reward_grid.csv").write_text("\n".join(lines) + "\n")
        print(f"wrote transcript CSVs to {out}")
    return 0 if result.phase.value in ("Completed", "Scrammed") else 1


def cmd_campaign(args) -> int:
    doc = cfgmod.load_document(args.config) if args.config else {}
    cfg = cfgmod.session_config(doc)
    dtd, dtp = _load_models(args)
    if args.reference_table:
        from .strategy import ReferenceTable
        cfg.reference_table = ReferenceTable.load_csv(args.reference_table)
    grid = default_campaign_grid()
    cases = batch_evaluate(grid, cfg, dtd, dtp)
    campaign_to_csv(cases, args.out)
    n_scram = sum(1 for c in cases if c.phase == "Scrammed")
    print(f"campaign of {len(cases)} cases -> {args.out} "
          f"({n_scram} scrams)")
    return 0


def cmd_reference_table(args) -> int:
    doc = cfgmod.load_document(args.config) if args.config else {}
    cfg = cfgmod.session_config(doc)
    sim = Simulator(cfg.plant_params)
    table = build_reference_table(
        sim, cfg.tau2_grid, cfg.t_trip_grid,
        cfg.malfunction.torque_fn(cfg.plant_params.nominal_torque),
        ramp_duration=cfg.ramp_duration, horizon=cfg.horizon)
    table.save_csv(args.out)
    print(f"wrote reference table ({len(table.rows)} rows) to {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve_api
    doc = cfgmod.load_document(args.config) if args.config else {}
    serve_api(args.dtd, args.dtp, bind=args.bind, config_defaults=doc)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plantloop")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("datagen", help="generate a scenario database")
    d.add_argument("--spec", required=True, help="JSON config with issue_space")
    d.add_argument("--out", required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--jobs", type=int, default=1)
    d.set_defaults(func=cmd_datagen)

    for name, fn in (("train-dtd", cmd_train_dtd), ("train-dtp", cmd_train_dtp)):
        t = sub.add_parser(name, help=f"{name} on a database")
        t.add_argument("--db", required=True)
        t.add_argument("--out", required=True)
        t.add_argument("--config", default=None)
        if name == "train-dtd":
            t.add_argument("--variant", choices=("fnn", "rnn"), default=None)
        t.set_defaults(func=fn)

    e = sub.add_parser("eval-dtd", help="evaluate a diagnosis model")
    e.add_argument("--model", required=True)
    e.add_argument("--db", required=True)
    e.add_argument("--noise", type=float, default=0.0)
    e.add_argument("--noise-study", action="store_true")
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_eval_dtd)

    e = sub.add_parser("eval-dtp", help="closed-loop evaluation of a prognosis model")
    e.add_argument("--model", required=True)
    e.add_argument("--db", required=True)
    e.add_argument("--t-rcmd", type=float, default=20.0)
    e.add_argument("--warmup", type=float, default=20.0)
    e.set_defaults(func=cmd_eval_dtp)

    c = sub.add_parser("coverage", help="distribution similarity of databases")
    c.add_argument("--reference", required=True)
    c.add_argument("--target", action="append", required=True,
                   help="name=path, repeatable")
    c.add_argument("--features", default="pfcl_temp,core_power,core_outlet_flow")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_coverage)

    s = sub.add_parser("sensitivity", help="hyperparameter sensitivity scan")
    s.add_argument("--config", required=True, help="JSON with space/defaults")
    s.add_argument("--db", required=True)
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sensitivity)

    h = sub.add_parser("hyperopt", help="sequential model-based optimization")
    h.add_argument("--config", required=True)
    h.add_argument("--db", required=True)
    h.add_argument("--trials", type=int, default=100)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--out", default=None)
    h.set_defaults(func=cmd_hyperopt)

    de = sub.add_parser("demo", help="auto-accept closed-loop session")
    de.add_argument("--dtd", required=True)
    de.add_argument("--dtp", required=True)
    de.add_argument("--config", default=None)
    de.add_argument("--reference-table", default=None)
    de.add_argument("--out", default=None)
    de.set_defaults(func=cmd_demo)

    ca = sub.add_parser("campaign", help="batch malfunction-grid evaluation")
    ca.add_argument("--dtd", required=True)
    ca.add_argument("--dtp", required=True)
    ca.add_argument("--config", default=None)
    ca.add_argument("--reference-table", default=None)
    ca.add_argument("--out", required=True)
    ca.set_defaults(func=cmd_campaign)

    rt = sub.add_parser("reference-table", help="brute-force availability table")
    rt.add_argument("--config", default=None)
    rt.add_argument("--out", required=True)
    rt.set_defaults(func=cmd_reference_table)

    sv = sub.add_parser("serve", help="run the session HTTP service")
    sv.add_argument("--dtd", required=True)
    sv.add_argument("--dtp", required=True)
    sv.add_argument("--bind", default="127.0.0.1:8000")
    sv.add_argument("--config", default=None)
    sv.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
