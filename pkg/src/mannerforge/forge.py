"""Dataset generation, split construction, and deterministic persistence.

Every example is generated from an RNG stream derived from (seed, index), so
corpora are reproducible byte for byte regardless of worker count.  Persisted
files are newline-delimited JSON records with sorted keys and no floating
point fields; the manifest carries a digest of every file so readers can
verify integrity.
"""
from __future__ import annotations

import hashlib
import json
import multiprocessing
import os
from dataclasses import dataclass, field

from .dsl import apply_program, parse_program, serialize_program
from .errors import (
    DigestMismatch,
    InsufficientExamples,
    MalformedRecord,
    MannerforgeError,
    RetryExhausted,
    SchemaMismatch,
)
from .metagrammar import ADVERB_TYPES, LexiconEntry, MetaGrammarConfig, sample_registry
from .pipeline import (
    BUILTIN_SURFACES,
    Lexicon,
    Percept,
    Plan,
    goal_satisfied,
    perceive,
    plan_interaction,
    plan_navigation,
    solve,
    transform,
)
from .seeding import derive_rng
from .symbols import final_heading
from .world import (
    VERBS,
    Command,
    WorldState,
    execute,
    parse_command,
    sample_situation,
    world_from_dict,
    world_to_dict,
)

SCHEMA_VERSION = 1

EXAMPLES_FILE = "examples.ndrec"
MODULE_FILES = {
    "perception": "perception.ndrec",
    "navigation": "navigation.ndrec",
    "interaction": "interaction.ndrec",
    "transformation": "transformation.ndrec",
}
REGISTRY_FILE = "registry.txt"
SPLITS_FILE = "splits.json"
MANIFEST_FILE = "manifest"


@dataclass(frozen=True)
class Example:
    """One dataset row: a command, its grounded situation, and the oracle's
    egocentric target sequence."""

    index: int
    command: tuple[str, ...]
    world: WorldState
    target: tuple[str, ...]
    verb: str
    adverb_surface: str | None = None
    adverb_type: str | None = None


@dataclass(frozen=True)
class SplitSpec:
    """Declarative split description.

    kinds: random (uniform partition), k_shot_adverb (exactly k examples of a
    surface in train, the rest in test), verb_adverb_holdout (every pairing of
    verb and surface in test), type_subset (drop registry adverbs outside the
    allowed types or surfaces from train), predicate (named filter to test).
    """

    kind: str
    name: str
    test_fraction: float | None = None
    surface: str | None = None
    k: int | None = None
    verb: str | None = None
    allowed_types: tuple[str, ...] | None = None
    surfaces: tuple[str, ...] | None = None
    predicate: str | None = None

    def __post_init__(self):
        if self.kind == "random":
            if self.test_fraction is None or not 0 < self.test_fraction < 1:
                raise ValueError("random split needs 0 < test_fraction < 1")
        elif self.kind == "k_shot_adverb":
            if not self.surface or self.k is None or self.k < 1:
                raise ValueError("k_shot_adverb split needs a surface and k >= 1")
        elif self.kind == "verb_adverb_holdout":
            if not self.surface or self.verb not in VERBS:
                raise ValueError("verb_adverb_holdout split needs a verb and a surface")
        elif self.kind == "type_subset":
            if self.allowed_types is None and self.surfaces is None:
                raise ValueError("type_subset split needs allowed_types or surfaces")
            for t in self.allowed_types or ():
                if t not in ADVERB_TYPES:
                    raise ValueError(f"unknown adverb type {t!r}")
        elif self.kind == "predicate":
            if not self.predicate:
                raise ValueError("predicate split needs a predicate name")
        else:
            raise ValueError(f"unknown split kind {self.kind!r}")

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "name": self.name}
        for key in ("test_fraction", "surface", "k", "verb", "predicate"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.allowed_types is not None:
            out["allowed_types"] = list(self.allowed_types)
        if self.surfaces is not None:
            out["surfaces"] = list(self.surfaces)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SplitSpec":
        return cls(
            kind=data["kind"],
            name=data["name"],
            test_fraction=data.get("test_fraction"),
            surface=data.get("surface"),
            k=data.get("k"),
            verb=data.get("verb"),
            allowed_types=tuple(data["allowed_types"]) if "allowed_types" in data else None,
            surfaces=tuple(data["surfaces"]) if "surfaces" in data else None,
            predicate=data.get("predicate"),
        )


@dataclass(frozen=True)
class SplitAssignment:
    train: tuple[int, ...]
    test: tuple[int, ...]
    dropped: tuple[int, ...] = ()


# Named predicates for externally defined holdouts; extend via register_predicate.
PREDICATES: dict = {}


def register_predicate(name: str, fn) -> None:
    PREDICATES[name] = fn


register_predicate("has_adverb", lambda ex: ex.adverb_surface is not None)
register_predicate("no_adverb", lambda ex: ex.adverb_surface is None)


@dataclass(frozen=True)
class ForgeConfig:
    seed: int = 0
    grid_size: int = 6
    num_examples: int = 1000
    extra_adverbs: int = 0
    meta: MetaGrammarConfig = field(default_factory=MetaGrammarConfig)
    splits: tuple[SplitSpec, ...] = ()
    max_depth: int = 10
    no_adverb_prob: float = 0.2
    distractors: tuple[int, int] = (0, 3)
    retry_limit: int = 50
    pinned_adverbs: tuple[str, ...] = ()

    def __post_init__(self):
        if self.num_examples < 1:
            raise ValueError("num_examples must be at least 1")
        if self.extra_adverbs < 0:
            raise ValueError("extra_adverbs must be nonnegative")
        if not 0 <= self.no_adverb_prob <= 1:
            raise ValueError("no_adverb_prob must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "grid_size": self.grid_size,
            "num_examples": self.num_examples,
            "extra_adverbs": self.extra_adverbs,
            "meta": {
                "type_weights": dict(self.meta.type_weights),
                "prefix_len_range": list(self.meta.prefix_len_range),
                "detour_rhs_max": self.meta.detour_rhs_max,
                "max_rejects": self.meta.max_rejects,
            },
            "splits": [s.to_dict() for s in self.splits],
            "max_depth": self.max_depth,
            "no_adverb_prob": self.no_adverb_prob,
            "distractors": list(self.distractors),
            "retry_limit": self.retry_limit,
            "pinned_adverbs": list(self.pinned_adverbs),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ForgeConfig":
        meta_data = data.get("meta", {})
        meta = MetaGrammarConfig(
            type_weights=dict(meta_data.get("type_weights", {"spinning_type": 0.4, "cautiously_type": 0.3, "detour_type": 0.3})),
            prefix_len_range=tuple(meta_data.get("prefix_len_range", (2, 8))),
            detour_rhs_max=meta_data.get("detour_rhs_max", 5),
            max_rejects=meta_data.get("max_rejects", 1000),
        )
        return cls(
            seed=data.get("seed", 0),
            grid_size=data.get("grid_size", 6),
            num_examples=data.get("num_examples", 1000),
            extra_adverbs=data.get("extra_adverbs", 0),
            meta=meta,
            splits=tuple(SplitSpec.from_dict(s) for s in data.get("splits", [])),
            max_depth=data.get("max_depth", 10),
            no_adverb_prob=data.get("no_adverb_prob", 0.2),
            distractors=tuple(data.get("distractors", (0, 3))),
            retry_limit=data.get("retry_limit", 50),
            pinned_adverbs=tuple(data.get("pinned_adverbs", ())),
        )


def build_lexicon(cfg: ForgeConfig) -> Lexicon:
    """Pinned programs first (in config order), then the sampled registry."""
    entries = []
    for text in cfg.pinned_adverbs:
        program = parse_program(text)
        entries.append(LexiconEntry(surface=program.name, program=program))
    if cfg.extra_adverbs:
        rng = derive_rng(cfg.seed, "registry")
        entries.extend(sample_registry(rng, cfg.extra_adverbs, cfg.meta))
    return Lexicon.build(entries)


def _generate_one(cfg: ForgeConfig, lexicon: Lexicon, surfaces, index: int) -> Example:
    rng = derive_rng(cfg.seed, "example", index)
    verb = rng.choice(VERBS)
    surface = None if rng.random() < cfg.no_adverb_prob else rng.choice(surfaces)

    for _ in range(cfg.retry_limit):
        world, phrase = sample_situation(rng, cfg.grid_size, cfg.distractors)
        noun = list(phrase[1:])  # drop the article
        size_adj = noun.pop(0) if noun[0] in ("small", "big") else None
        color = noun.pop(0) if len(noun) == 2 else None
        command = Command(
            verb=verb,
            shape=noun[0],
            color=color,
            size_adj=size_adj,
            adverb=tuple(surface.split()) if surface else None,
        )
        try:
            target = solve(command, world, lexicon, cfg.max_depth)
            trajectory = execute(world, target)
        except MannerforgeError:
            continue
        if not goal_satisfied(verb, world, trajectory):
            continue
        return Example(
            index=index,
            command=command.tokens(),
            world=world,
            target=target,
            verb=verb,
            adverb_surface=surface,
            adverb_type=lexicon.types[surface] if surface else None,
        )
    raise RetryExhausted(
        f"example {index}: could not realize verb {verb!r}"
        + (f" with adverb {surface!r}" if surface else "")
        + f" on a {cfg.grid_size}x{cfg.grid_size} grid after {cfg.retry_limit} attempts"
    )


def generate_examples(cfg: ForgeConfig, lexicon: Lexicon | None = None):
    """Yield the configured number of validated examples, in index order."""
    if lexicon is None:
        lexicon = build_lexicon(cfg)
    surfaces = lexicon.surfaces()
    for index in range(cfg.num_examples):
        yield _generate_one(cfg, lexicon, surfaces, index)


def _worker_chunk(args) -> list[Example]:
    cfg_dict, lo, hi = args
    cfg = ForgeConfig.from_dict(cfg_dict)
    lexicon = build_lexicon(cfg)
    surfaces = lexicon.surfaces()
    return [_generate_one(cfg, lexicon, surfaces, i) for i in range(lo, hi)]


def generate_examples_parallel(cfg: ForgeConfig, jobs: int = 1) -> list[Example]:
    """Parallel generation over index chunks; output identical to the
    sequential generator because every index derives its own RNG stream."""
    if jobs <= 1 or cfg.num_examples < 2 * jobs:
        return list(generate_examples(cfg))
    cfg_dict = cfg.to_dict()
    chunk = max(1, cfg.num_examples // (jobs * 8))
    spans = [
        (cfg_dict, lo, min(lo + chunk, cfg.num_examples))
        for lo in range(0, cfg.num_examples, chunk)
    ]
    with multiprocessing.Pool(jobs) as pool:
        parts = pool.map(_worker_chunk, spans)
    out: list[Example] = []
    for part in parts:
        out.extend(part)
    out.sort(key=lambda ex: ex.index)
    return out


# --- splits -------------------------------------------------------------------

def build_splits(examples, specs, rng) -> dict[str, SplitAssignment]:
    """Build every named split.  Train and test are disjoint in each; dropped
    indices (type_subset only) belong to neither side."""
    examples = list(examples)
    base = rng.getrandbits(64)
    result: dict[str, SplitAssignment] = {}
    for spec in specs:
        sub = derive_rng(base, "split", spec.name)
        indices = [ex.index for ex in examples]

        if spec.kind == "random":
            shuffled = indices[:]
            sub.shuffle(shuffled)
            n_test = int(len(shuffled) * spec.test_fraction)
            test = sorted(shuffled[:n_test])
            train = sorted(shuffled[n_test:])
            result[spec.name] = SplitAssignment(tuple(train), tuple(test))

        elif spec.kind == "k_shot_adverb":
            matching = [ex.index for ex in examples if ex.adverb_surface == spec.surface]
            if len(matching) < spec.k:
                raise InsufficientExamples(
                    f"split {spec.name!r}: {len(matching)} examples of {spec.surface!r}, need {spec.k}"
                )
            shots = set(sub.sample(matching, spec.k))
            test = sorted(i for i in matching if i not in shots)
            train = sorted(i for i in indices if i not in set(matching) or i in shots)
            result[spec.name] = SplitAssignment(tuple(train), tuple(test))

        elif spec.kind == "verb_adverb_holdout":
            test = sorted(
                ex.index
                for ex in examples
                if ex.verb == spec.verb and ex.adverb_surface == spec.surface
            )
            held = set(test)
            train = sorted(i for i in indices if i not in held)
            result[spec.name] = SplitAssignment(tuple(train), tuple(test))

        elif spec.kind == "type_subset":
            dropped = []
            train = []
            for ex in examples:
                if ex.adverb_surface is None or ex.adverb_surface in BUILTIN_SURFACES:
                    train.append(ex.index)
                elif spec.surfaces is not None:
                    (train if ex.adverb_surface in spec.surfaces else dropped).append(ex.index)
                elif ex.adverb_type in spec.allowed_types:
                    train.append(ex.index)
                else:
                    dropped.append(ex.index)
            result[spec.name] = SplitAssignment(
                tuple(sorted(train)), (), tuple(sorted(dropped))
            )

        elif spec.kind == "predicate":
            try:
                fn = PREDICATES[spec.predicate]
            except KeyError:
                raise ValueError(f"unregistered predicate {spec.predicate!r}") from None
            test = sorted(ex.index for ex in examples if fn(ex))
            held = set(test)
            train = sorted(i for i in indices if i not in held)
            result[spec.name] = SplitAssignment(tuple(train), tuple(test))

    return result


# --- per-module records --------------------------------------------------------

def _percept_to_dict(percept: Percept) -> dict:
    return {
        "agent": {"row": percept.agent_position.row, "col": percept.agent_position.col},
        "heading": percept.agent_heading,
        "target": {"row": percept.target_position.row, "col": percept.target_position.col},
    }


def emit_module_datasets(examples, lexicon: Lexicon, max_depth: int = 10) -> dict[str, list[dict]]:
    """Per-module training records whose targets recompose to each example's
    end-to-end target."""
    streams: dict[str, list[dict]] = {name: [] for name in MODULE_FILES}
    for ex in examples:
        command = parse_command(ex.command)
        adverb = lexicon.lookup(command.adverb) if command.adverb else None
        percept = perceive(command, ex.world)
        plan = plan_navigation(percept, adverb)
        executed_plan = (
            apply_program(adverb, plan.symbols, max_depth) if adverb else plan.symbols
        )
        arrival = final_heading(executed_plan, ex.world.agent_heading)
        interactions = plan_interaction(percept, ex.world, command, arrival)

        percept_dict = _percept_to_dict(percept)
        streams["perception"].append(
            {
                "index": ex.index,
                "command": list(ex.command),
                "situation": world_to_dict(ex.world),
                "target": percept_dict,
            }
        )
        streams["navigation"].append(
            {
                "index": ex.index,
                "percept": percept_dict,
                "adverb": ex.adverb_surface,
                "target": {"mode": plan.mode, "symbols": list(plan.symbols)},
            }
        )
        streams["interaction"].append(
            {
                "index": ex.index,
                "percept": percept_dict,
                "situation": world_to_dict(ex.world),
                "verb": ex.verb,
                "arrival_heading": arrival,
                "target": list(interactions),
            }
        )
        streams["transformation"].append(
            {
                "index": ex.index,
                "plan": {"mode": plan.mode, "symbols": list(plan.symbols)},
                "interactions": list(interactions),
                "adverb": ex.adverb_surface,
                "start_heading": ex.world.agent_heading,
                "target": list(ex.target),
            }
        )
    return streams


def recompose(record_tuple, lexicon: Lexicon, max_depth: int = 10) -> tuple[str, ...]:
    """Re-run the transformation module on persisted navigation, interaction,
    and transformation records; the result must equal the example target."""
    transformation = record_tuple["transformation"]
    plan = Plan(
        mode=transformation["plan"]["mode"],
        symbols=tuple(transformation["plan"]["symbols"]),
    )
    adverb = lexicon.lookup(transformation["adverb"]) if transformation["adverb"] else None
    return transform(
        plan,
        tuple(transformation["interactions"]),
        adverb,
        start=transformation["start_heading"],
        max_depth=max_depth,
    )


# --- persistence ----------------------------------------------------------------

def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def example_to_record(ex: Example, split: str) -> dict:
    return {
        "index": ex.index,
        "split": split,
        "command": list(ex.command),
        "target": list(ex.target),
        "situation": world_to_dict(ex.world),
        "adverb": (
            {"surface": ex.adverb_surface, "type": ex.adverb_type}
            if ex.adverb_surface
            else None
        ),
        "verb": ex.verb,
    }


def example_from_record(record: dict) -> Example:
    adverb = record.get("adverb")
    return Example(
        index=record["index"],
        command=tuple(record["command"]),
        world=world_from_dict(record["situation"]),
        target=tuple(record["target"]),
        verb=record["verb"],
        adverb_surface=adverb["surface"] if adverb else None,
        adverb_type=adverb["type"] if adverb else None,
    )


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


@dataclass(frozen=True)
class Dataset:
    examples: list
    splits: dict
    manifest: dict
    lexicon: Lexicon
    path: str | None = None

    def example_by_index(self, index: int) -> Example:
        return self._index_map()[index]

    def _index_map(self) -> dict:
        if not hasattr(self, "_cached_index_map"):
            object.__setattr__(
                self, "_cached_index_map", {ex.index: ex for ex in self.examples}
            )
        return self._cached_index_map


def write_dataset(
    examples,
    lexicon: Lexicon,
    splits: dict[str, SplitAssignment],
    cfg: ForgeConfig,
    out_dir: str,
) -> dict:
    """Persist examples, module records, registry, splits, and manifest."""
    examples = list(examples)
    os.makedirs(out_dir, exist_ok=True)

    base_split = next((s for s in cfg.splits if s.kind == "random"), None)
    base_test = set(splits[base_split.name].test) if base_split else set()

    with open(os.path.join(out_dir, EXAMPLES_FILE), "w", encoding="utf-8") as fh:
        for ex in examples:
            split = "test" if ex.index in base_test else "train"
            fh.write(_dumps(example_to_record(ex, split)) + "\n")

    streams = emit_module_datasets(examples, lexicon, cfg.max_depth)
    for module, filename in MODULE_FILES.items():
        with open(os.path.join(out_dir, filename), "w", encoding="utf-8") as fh:
            for record in streams[module]:
                fh.write(_dumps(record) + "\n")

    registry_path = os.path.join(out_dir, REGISTRY_FILE)
    with open(registry_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(serialize_program(e.program) for e in lexicon.entries))

    with open(os.path.join(out_dir, SPLITS_FILE), "w", encoding="utf-8") as fh:
        payload = {
            name: {
                "train": list(a.train),
                "test": list(a.test),
                "dropped": list(a.dropped),
            }
            for name, a in splits.items()
        }
        fh.write(json.dumps(payload, sort_keys=True, separators=(",", ":")))

    adverb_counts: dict[str, int] = {}
    for ex in examples:
        if ex.adverb_surface:
            adverb_counts[ex.adverb_surface] = adverb_counts.get(ex.adverb_surface, 0) + 1

    files = [EXAMPLES_FILE, *MODULE_FILES.values(), REGISTRY_FILE, SPLITS_FILE]
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "registry_digest": _sha256(registry_path),
        "counts": {
            name: {
                "train": len(a.train),
                "test": len(a.test),
                "dropped": len(a.dropped),
            }
            for name, a in splits.items()
        },
        "num_examples": len(examples),
        "adverb_counts": dict(sorted(adverb_counts.items())),
        "files": {f: _sha256(os.path.join(out_dir, f)) for f in files},
    }
    with open(os.path.join(out_dir, MANIFEST_FILE), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


def _read_records(path: str) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise MalformedRecord(path, lineno, str(exc)) from None
    return records


def read_dataset(path: str, verify: bool = True) -> Dataset:
    """Load a persisted dataset, verifying the schema version and every file
    digest recorded in the manifest."""
    manifest_path = os.path.join(path, MANIFEST_FILE)
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"dataset schema {manifest.get('schema_version')!r}, reader supports {SCHEMA_VERSION}"
        )
    if verify:
        for filename, expected in manifest["files"].items():
            actual = _sha256(os.path.join(path, filename))
            if actual != expected:
                raise DigestMismatch(f"{filename}: digest {actual} != manifest {expected}")

    examples = [example_from_record(r) for r in _read_records(os.path.join(path, EXAMPLES_FILE))]

    with open(os.path.join(path, SPLITS_FILE), encoding="utf-8") as fh:
        raw_splits = json.load(fh)
    splits = {
        name: SplitAssignment(
            tuple(v["train"]), tuple(v["test"]), tuple(v.get("dropped", ()))
        )
        for name, v in raw_splits.items()
    }

    registry_text = open(os.path.join(path, REGISTRY_FILE), encoding="utf-8").read()
    entries = []
    for block in registry_text.split("\n\n"):
        if block.strip():
            program = parse_program(block)
            entries.append(LexiconEntry(surface=program.name, program=program))
    lexicon = Lexicon.build(entries)

    return Dataset(examples=examples, splits=splits, manifest=manifest, lexicon=lexicon, path=path)


def forge_dataset(cfg: ForgeConfig, out_dir: str, jobs: int = 1) -> dict:
    """End-to-end: registry, examples, splits, files.  Returns the manifest."""
    lexicon = build_lexicon(cfg)
    examples = generate_examples_parallel(cfg, jobs=jobs) if jobs > 1 else list(
        generate_examples(cfg, lexicon)
    )
    splits = build_splits(examples, cfg.splits, derive_rng(cfg.seed, "splits"))
    return write_dataset(examples, lexicon, splits, cfg, out_dir)
