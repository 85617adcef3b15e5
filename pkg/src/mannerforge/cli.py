"""Command-line interface.

Subcommands cover the full workflow: forging datasets, sampling adverb
registries, applying and grounding manner programs, solving single commands,
and scoring prediction files.  Exit status is 0 on success, 2 for usage
errors, and 1 for domain errors (reported as `error[Type]: message`).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources

from .dsl import apply_program, builtin_adverbs, ground, parse_program, serialize_program
from .errors import MannerforgeError
from .forge import ForgeConfig, forge_dataset, read_dataset
from .harness import dataset_stats, evaluate, read_predictions
from .metagrammar import ADVERB_TYPES, LexiconEntry, MetaGrammarConfig, sample_registry
from .pipeline import Lexicon, solve
from .seeding import derive_rng
from .symbols import parse_symbols, require_heading
from .world import parse_command, render_world, world_from_dict

SEED_ENV = "FORGE_SEED"


def _fallback_seed() -> int | None:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else None


def _load_config(value: str) -> dict:
    if os.path.exists(value):
        with open(value, encoding="utf-8") as fh:
            return json.load(fh)
    preset = resources.files("mannerforge").joinpath("presets", f"{value}.json")
    if preset.is_file():
        return json.loads(preset.read_text(encoding="utf-8"))
    raise MannerforgeError(f"no config file or preset named {value!r}")


def _preset_names() -> list[str]:
    folder = resources.files("mannerforge").joinpath("presets")
    return sorted(p.name[: -len(".json")] for p in folder.iterdir() if p.name.endswith(".json"))


_WEIGHT_ALIASES = {
    "spinning": "spinning_type",
    "cautiously": "cautiously_type",
    "zigzag": "zigzag_type",
    "detour": "detour_type",
}


def _parse_weights(text: str) -> dict:
    weights = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        key = key.strip()
        key = _WEIGHT_ALIASES.get(key, key)
        if key not in ADVERB_TYPES:
            raise MannerforgeError(f"unknown adverb type in --weights: {key!r}")
        weights[key] = float(value)
    return weights


def _resolve_program(name_or_path: str):
    for program in builtin_adverbs():
        if program.surface == name_or_path:
            return program
    if os.path.exists(name_or_path):
        with open(name_or_path, encoding="utf-8") as fh:
            return parse_program(fh.read())
    raise MannerforgeError(f"no built-in adverb or program file named {name_or_path!r}")


def _cmd_generate(args) -> int:
    data = _load_config(args.config) if args.config else {}
    if args.seed is not None:
        data["seed"] = args.seed
    elif "seed" not in data:
        env = _fallback_seed()
        if env is not None:
            data["seed"] = env
    if args.extra_adverbs is not None:
        data["extra_adverbs"] = args.extra_adverbs
    if args.num_examples is not None:
        data["num_examples"] = args.num_examples
    cfg = ForgeConfig.from_dict(data)
    manifest = forge_dataset(cfg, args.out, jobs=args.jobs)
    print(f"wrote {manifest['num_examples']} examples to {args.out}")
    for name, counts in sorted(manifest["counts"].items()):
        dropped = f", dropped {counts['dropped']}" if counts["dropped"] else ""
        print(f"  split {name}: train {counts['train']}, test {counts['test']}{dropped}")
    return 0


def _cmd_sample_adverbs(args) -> int:
    seed = args.seed if args.seed is not None else (_fallback_seed() or 0)
    cfg = MetaGrammarConfig(type_weights=_parse_weights(args.weights)) if args.weights else MetaGrammarConfig()
    entries = sample_registry(derive_rng(seed, "registry"), args.n, cfg)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(serialize_program(e.program) for e in entries))
    print(f"wrote {len(entries)} adverb programs to {args.out}")
    return 0


def _cmd_transform(args) -> int:
    program = _resolve_program(args.program)
    sequence = parse_symbols(args.input)
    heading = require_heading(args.heading)
    rewritten = apply_program(program, sequence, args.max_depth)
    print(" ".join(ground(rewritten, heading)))
    return 0


def _cmd_ground(args) -> int:
    sequence = parse_symbols(args.input)
    heading = require_heading(args.heading)
    print(" ".join(ground(sequence, heading)))
    return 0


def _cmd_solve(args) -> int:
    with open(args.world, encoding="utf-8") as fh:
        world = world_from_dict(json.load(fh))
    command = parse_command(args.command.split())
    lexicon = None
    if args.registry:
        entries = []
        text = open(args.registry, encoding="utf-8").read()
        for block in text.split("\n\n"):
            if block.strip():
                program = parse_program(block)
                entries.append(LexiconEntry(surface=program.name, program=program))
        lexicon = Lexicon.build(entries)
    print(" ".join(solve(command, world, lexicon)))
    return 0


def _cmd_evaluate(args) -> int:
    dataset = read_dataset(args.dataset)
    predictions = read_predictions(args.predictions)
    names = [args.split] if args.split else None
    report = evaluate(dataset, predictions, split_names=names, jobs=args.jobs)
    payload = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    print(payload)
    return 0


def _cmd_stats(args) -> int:
    dataset = read_dataset(args.dataset)
    print(json.dumps(dataset_stats(dataset), indent=2, sort_keys=True))
    return 0


def _cmd_inspect(args) -> int:
    dataset = read_dataset(args.dataset)
    example = dataset.example_by_index(args.index)
    print(render_world(example.world))
    print(f"command: {' '.join(example.command)}")
    if example.adverb_surface:
        print(f"adverb:  {example.adverb_surface} ({example.adverb_type})")
    print(f"target:  {' '.join(example.target)}")
    return 0


def _cmd_presets(args) -> int:
    for name in _preset_names():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mannerforge",
        description="Gridworld instruction datasets with rewrite-rule adverb manners.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="forge a dataset from a config file or preset")
    p.add_argument("--config", help="JSON config file path or preset name")
    p.add_argument("--seed", type=int, help=f"override the config seed (falls back to ${SEED_ENV})")
    p.add_argument("--extra-adverbs", type=int, help="override the sampled adverb count")
    p.add_argument("--num-examples", type=int, help="override the example count")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("sample-adverbs", help="sample a registry of novel adverb programs")
    p.add_argument("--n", type=int, required=True, help="number of programs")
    p.add_argument("--weights", help="type weights, e.g. spinning=0.4,cautiously=0.3,detour=0.3")
    p.add_argument("--seed", type=int, help=f"sampling seed (falls back to ${SEED_ENV})")
    p.add_argument("--out", required=True, help="output registry file")
    p.set_defaults(fn=_cmd_sample_adverbs)

    p = sub.add_parser("transform", help="apply a manner program and ground the result")
    p.add_argument("--program", required=True, help="built-in adverb name or program file")
    p.add_argument("--input", required=True, help="space-separated symbol sequence")
    p.add_argument("--heading", required=True, help="starting heading")
    p.add_argument("--max-depth", type=int, default=10)
    p.set_defaults(fn=_cmd_transform)

    p = sub.add_parser("ground", help="ground a mixed sequence into egocentric actions")
    p.add_argument("--input", required=True, help="space-separated symbol sequence")
    p.add_argument("--heading", required=True, help="starting heading")
    p.set_defaults(fn=_cmd_ground)

    p = sub.add_parser("solve", help="solve a command against a world file")
    p.add_argument("--world", required=True, help="world state JSON file")
    p.add_argument("--command", required=True, help="full command string")
    p.add_argument("--registry", help="optional registry file of extra adverbs")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("evaluate", help="score a predictions file against a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", help="evaluate one split (default: all)")
    p.add_argument("--predictions", required=True)
    p.add_argument("--report", help="also write the report JSON here")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for semantic checks")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("stats", help="print dataset statistics")
    p.add_argument("--dataset", required=True)
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("inspect", help="render one example as an ASCII grid")
    p.add_argument("--dataset", required=True)
    p.add_argument("--index", type=int, required=True)
    p.set_defaults(fn=_cmd_inspect)

    p = sub.add_parser("presets", help="list shipped config presets")
    p.set_defaults(fn=_cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except MannerforgeError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
