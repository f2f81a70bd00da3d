"""``clgd`` command-line entry point."""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import bench
from .baselines import chamfer, emd_exact, hausdorff
from .evaluation import FLOW_CONVENTION, flow_error, registration_error
from .io import FORMATS, dump_json, load_cloud, load_json, save_cloud
from .metric import ClgdParams, clgd
from .reference import RNG_ALGORITHM, ReferenceParams
from .solvers import OptimizerConfig, estimate_flow, register_rigid
from .synth import KINDS, SceneSpec, synth_scene

CD_CONVENTION = "chamfer = mean_nn(a->b) + mean_nn(b->a), unsquared euclidean"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(2)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _vec3(text: str) -> tuple:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return tuple(parts)


def _vec3_list(text: str) -> tuple:
    return tuple(_vec3(chunk) for chunk in text.split(";") if chunk.strip())


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--threads", type=int, default=None,
                   help="tree-query threads (default: $CLGD_THREADS or all cores)")
    p.add_argument("--format", choices=FORMATS, default=None, help="force the cloud file format")


def _add_clgd(p: argparse.ArgumentParser, beta: float) -> None:
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--beta", type=float, default=beta)
    p.add_argument("--epsilon", type=float, default=1e-12)
    p.add_argument("--ref-r", type=int, default=10)
    p.add_argument("--ref-t", type=float, default=3.0)
    p.add_argument("--ref-include-other", type=_bool, default=True)
    p.add_argument("--resample-refs", action="store_true", help="regenerate references every iteration")


def _add_opt(p: argparse.ArgumentParser, iters: int, lr: float) -> None:
    p.add_argument("--iters", type=int, default=iters)
    p.add_argument("--lr", type=float, default=lr)
    p.add_argument("--log-every", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clgd", description="Calibrated local geometry distance for 3D point clouds")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dist", help="distance between two clouds")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--metric", choices=("clgd", "cd", "hd", "emd"), default="clgd")
    p.add_argument("--select", choices=("a", "b"), default="a", help="cloud that seeds the references")
    p.add_argument("--symmetrize", action="store_true")
    p.add_argument("--per-ref-out", default=None, help="CSV of ref_x,ref_y,ref_z,d,score")
    p.add_argument("--out", default=None, help="JSON report")
    _add_clgd(p, beta=0.0)
    _add_common(p)

    p = sub.add_parser("register", help="rigid registration of --src onto --tgt")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--metric", choices=("clgd", "cd", "emd"), default="clgd")
    p.add_argument("--gt", default=None, help="ground-truth JSON with R and t")
    p.add_argument("--out", default=None)
    _add_clgd(p, beta=3.0)
    _add_opt(p, 1000, 0.02)
    _add_common(p)

    p = sub.add_parser("flow", help="scene flow from --src to --tgt")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--metric", choices=("clgd", "cd", "emd"), default="clgd")
    p.add_argument("--alpha", type=float, default=50.0)
    p.add_argument("--ks", type=int, default=30)
    p.add_argument("--gt", default=None, help="ground-truth JSON with a flow array")
    p.add_argument("--out", default=None)
    _add_clgd(p, beta=0.0)
    _add_opt(p, 500, 0.01)
    _add_common(p)

    p = sub.add_parser("synth", help="write a seeded synthetic scene")
    p.add_argument("--kind", choices=KINDS, default="sphere")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--rotation-deg", type=float, default=0.0)
    p.add_argument("--axis", type=_vec3, default=None)
    p.add_argument("--translation", type=float, default=0.0, help="magnitude along a random direction")
    p.add_argument("--translation-vec", type=_vec3, default=None)
    p.add_argument("--crop", type=float, default=0.0)
    p.add_argument("--flows", type=_vec3_list, default=None, help="per-object flows 'x,y,z;x,y,z'")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--relief", type=float, default=0.0)
    p.add_argument("--resample", action="store_true", help="sample the target independently of the source")
    p.add_argument("--target-n", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--ext", choices=("xyz", "ply"), default="xyz")
    p.add_argument("--seed", type=_seed, default=0)

    p = sub.add_parser("eval", help="score a register/flow result against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("bench", help="scaling and ablation sweeps")
    p.add_argument("--suite", choices=bench.SUITES, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--lr", type=float, default=0.02)
    p.add_argument("--sizes", type=lambda s: tuple(int(x) for x in s.split(",")), default=bench.SCALING_SIZES)
    p.add_argument("--values", type=lambda s: tuple(float(x) for x in s.split(",")), default=None)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--threads", type=int, default=None)
    return parser


def _config(args) -> dict:
    # thread count never changes results, so it is kept out of the echoed config
    return {k: v for k, v in sorted(vars(args).items()) if k != "threads"}


def _clgd_params(args) -> ClgdParams:
    ref = ReferenceParams(R=args.ref_r, T=args.ref_t, include_other=args.ref_include_other,
                          seed=args.seed, resample_every_iter=args.resample_refs)
    return ClgdParams(K=args.k, beta=args.beta, epsilon=args.epsilon, reference=ref,
                      symmetrize=getattr(args, "symmetrize", False))


def _opt(args) -> OptimizerConfig:
    return OptimizerConfig(iterations=args.iters, learning_rate=args.lr, log_every=args.log_every)


def _log(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _emit(doc: dict, out) -> None:
    text = dump_json(doc, out)
    if out is None:
        sys.stdout.write(text)


def cmd_dist(args) -> int:
    a, b = load_cloud(args.a, args.format), load_cloud(args.b, args.format)
    start = time.perf_counter()
    doc = {"command": "dist", "config": _config(args), "metric": args.metric}
    if args.metric == "clgd":
        params = _clgd_params(args)
        select = "first" if args.select == "a" else "second"
        rep = clgd(a, b, params, select=select, workers=args.threads)
        value = rep.value
        doc["rng"] = RNG_ALGORITHM
        if args.per_ref_out:
            if rep.per_reference is None:
                raise CliError("--per-ref-out: not available with --symmetrize")
            with open(args.per_ref_out, "w", encoding="utf-8") as fh:
                fh.write("ref_x,ref_y,ref_z,d,score\n")
                for (x, y, z), d, s in zip(rep.references.tolist(), rep.per_reference.tolist(), rep.scores.tolist()):
                    fh.write(f"{x:.17g},{y:.17g},{z:.17g},{d:.17g},{s:.17g}\n")
    elif args.metric == "cd":
        rep = chamfer(a, b, args.threads)
        value = rep.value
        doc.update(convention=CD_CONVENTION, forward_mean=rep.forward_mean, backward_mean=rep.backward_mean)
    elif args.metric == "hd":
        value = hausdorff(a, b, args.threads)
    else:
        value = emd_exact(a, b).value
    doc["value"] = value
    doc["runtime"] = {"wall_clock_s": time.perf_counter() - start, "threads": args.threads}
    if args.out:
        dump_json(doc, args.out)
    print(f"{value:.6g}")
    return 0


def _gt_eval_registration(gt_path, R, t) -> dict:
    gt = load_json(gt_path)
    if "R" not in gt or "t" not in gt:
        raise CliError("--gt: file lacks R and t")
    return registration_error(R, t, np.asarray(gt["R"]), np.asarray(gt["t"])).to_dict()


def _gt_eval_flow(gt_path, F) -> dict:
    gt = load_json(gt_path)
    if "flow" not in gt:
        raise CliError("--gt: file lacks a flow array")
    out = flow_error(F, np.asarray(gt["flow"])).to_dict()
    out["convention"] = FLOW_CONVENTION
    return out


def cmd_register(args) -> int:
    src, tgt = load_cloud(args.src, args.format), load_cloud(args.tgt, args.format)
    T, trace = register_rigid(src, tgt, args.metric, _clgd_params(args), _opt(args),
                              seed=args.seed, workers=args.threads, log=_log)
    R, t = T.R, T.t
    doc = {
        "command": "register",
        "config": _config(args),
        "solver": trace.config,
        "transform": {"xi": T.xi, "R": R, "t": t},
        "best_iteration": trace.best_iteration,
        "best_objective": trace.best_objective,
        "objective": trace.objective,
    }
    if args.gt:
        doc["eval"] = _gt_eval_registration(args.gt, R, t)
    doc["runtime"] = {"wall_clock_s": trace.wall_clock_s, "threads": args.threads}
    _emit(doc, args.out)
    return 0


def cmd_flow(args) -> int:
    src, tgt = load_cloud(args.src, args.format), load_cloud(args.tgt, args.format)
    F, trace = estimate_flow(src, tgt, args.metric, _clgd_params(args), args.alpha, args.ks, _opt(args),
                             seed=args.seed, workers=args.threads, log=_log)
    doc = {
        "command": "flow",
        "config": _config(args),
        "solver": trace.config,
        "flow": F.F,
        "best_iteration": trace.best_iteration,
        "best_objective": trace.best_objective,
        "objective": trace.objective,
    }
    if args.gt:
        doc["eval"] = _gt_eval_flow(args.gt, F.F)
    doc["runtime"] = {"wall_clock_s": trace.wall_clock_s, "threads": args.threads}
    _emit(doc, args.out)
    return 0


def cmd_synth(args) -> int:
    translation = args.translation_vec if args.translation_vec is not None else args.translation
    spec = SceneSpec(rotation_deg=args.rotation_deg, axis=args.axis, translation=translation,
                     crop=args.crop, flows=args.flows, noise=args.noise, relief=args.relief,
                     resample=args.resample, target_n=args.target_n)
    scene = synth_scene(args.kind, args.n, args.seed, spec)
    os.makedirs(args.out_dir, exist_ok=True)
    save_cloud(scene.src, os.path.join(args.out_dir, f"src.{args.ext}"))
    save_cloud(scene.tgt, os.path.join(args.out_dir, f"tgt.{args.ext}"))
    dump_json({"config": _config(args), **scene.ground_truth()}, os.path.join(args.out_dir, "gt.json"))
    print(f"{scene.src.shape[0]} source / {scene.tgt.shape[0]} target points -> {args.out_dir}")
    return 0


def cmd_eval(args) -> int:
    pred = load_json(args.pred)
    doc = {"command": "eval", "config": _config(args)}
    if "transform" in pred:
        doc["registration"] = _gt_eval_registration(args.gt, np.asarray(pred["transform"]["R"]),
                                                    np.asarray(pred["transform"]["t"]))
    elif "flow" in pred:
        doc["flow"] = _gt_eval_flow(args.gt, np.asarray(pred["flow"]))
    else:
        raise CliError("--pred: file holds neither a transform nor a flow")
    _emit(doc, args.out)
    return 0


def cmd_bench(args) -> int:
    opt = OptimizerConfig(iterations=args.iters, learning_rate=args.lr)
    rows = bench.run_suite(args.suite, n=args.n, trials=args.trials, seed=args.seed, opt=opt,
                           values=args.values, sizes=args.sizes, repeats=args.repeats, workers=args.threads)
    bench.write_csv(rows, args.out)
    print(f"{len(rows)} rows -> {args.out}")
    return 0


COMMANDS = {
    "dist": cmd_dist, "register": cmd_register, "flow": cmd_flow,
    "synth": cmd_synth, "eval": cmd_eval, "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        sys.stderr.write("error: argument --threads: must be >= 1\n")
        return 2
    try:
        return COMMANDS[args.command](args)
    except (CliError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        sys.stderr.write(f"error: {msg}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
