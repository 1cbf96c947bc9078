"""Stage orchestration: work directory layout, atomic artifacts and the manifest."""

from __future__ import annotations

import contextlib
import hashlib
import logging
import os
import time
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Sequence, Tuple

import cpuinfo

from .config import PipelineConfig, parse_coords
from .descent import DescentParams, Descender, read_transcript_logs, verify_dlog, write_transcript
from .errors import ContractViolation, MissingArtifact
from .factorbase import FactorBase, IdealOracle, build_factor_base, read_factor_base, write_factor_base
from .linalg import (SchirokauerSpec, alpha_image, build_system, make_sm_spec, read_system, read_vector,
                     set_sm, unit_rank, wiedemann_nullspace, write_system, write_vector)
from .logdb import read_logdb, reconstruct, seed_from_nullspace, write_logdb
from .polyselect import (PolySetup, TowerParams, quality_score, read_setup, sample_primes,
                         select_polynomials, write_setup)
from .relations import Relation, read_relations, sq_header, write_relations
from .relproc import merge, purge, read_relation_sets, remove_duplicates, write_relation_sets
from .sieve4d import SieveParams, sieve_many, special_q_ideals

logger = logging.getLogger("extnfs.pipeline")

STAGES = ("polyselect", "makefb", "sieve", "dedup", "purge", "merge", "sm", "linalg",
          "logrecon", "descent", "verify")

SETUP = "setup.txt"
FB = "fb.{}.txt"
RELS_DIR = "rels"
CHUNK = "chunk.{:04d}.txt"
UNIQUE = "rels.unique.txt"
PURGED = "rels.purged.txt"
RELSETS = "relsets.txt"
SM = "sm.txt"
MATRIX = "matrix.txt"
NULLSPACE = "nullspace.txt"
LOGDB = "logdb.txt"
DESCENT = "descent.txt"
MANIFEST = "manifest.txt"
SPECIAL_Q_PER_CHUNK = 64


@lru_cache(maxsize=1)
def cpu_brand() -> str:
    info = cpuinfo.get_cpu_info()
    return info.get("brand_raw", "unknown").replace(" ", "_")


def sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


@contextlib.contextmanager
def atomic_output(path: Path) -> Iterator[Path]:
    """Yield a temporary sibling path and rename it over ``path`` on success."""
    path.parent.mkdir(parents=True, exist_ok=True)
    temp = path.with_name(f".{path.name}.tmp")
    try:
        yield temp
        os.replace(temp, path)
    finally:
        if temp.exists():
            temp.unlink()


class Workdir:
    """Artifact paths and the manifest of one pipeline run."""

    def __init__(self, config: PipelineConfig) -> None:
        self.config = config
        self.root = Path(config.workdir)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.root / name

    def require(self, *names: str) -> List[Path]:
        paths = [self.path(name) for name in names]
        for path in paths:
            if not path.exists():
                raise MissingArtifact(f"missing {path.name}; run the stage that produces it first")
        return paths

    def chunks(self) -> List[Path]:
        chunks = sorted((self.root / RELS_DIR).glob("chunk.*.txt"))
        if not chunks:
            raise MissingArtifact(f"missing {RELS_DIR}/chunk.*.txt; run the sieve stage first")
        return chunks

    def manifest(self) -> Dict[str, str]:
        path = self.path(MANIFEST)
        entries: Dict[str, str] = {}
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                stage, _, rest = line.partition(" ")
                if stage:
                    entries[stage] = rest
        return entries

    def record(self, stage: str, inputs: Sequence[Path], outputs: Sequence[Path], seconds: float) -> None:
        entries = self.manifest()
        fields = [f"seed={self.config.seed}", f"seconds={seconds:.2f}", f"cpu={cpu_brand()}",
                  f"workers={self.config.workers}"]
        fields += [f"in:{path.relative_to(self.root)}={sha256(path)}" for path in inputs]
        fields += [f"out:{path.relative_to(self.root)}={sha256(path)}" for path in outputs]
        entries[stage] = " ".join(fields)
        with atomic_output(self.path(MANIFEST)) as temp:
            temp.write_text("".join(f"{name} {entries[name]}\n" for name in STAGES if name in entries),
                            encoding="utf-8")


def _setup(work: Workdir) -> PolySetup:
    (path,) = work.require(SETUP)
    return read_setup(path)


def _factor_bases(work: Workdir, setup: PolySetup) -> Tuple[FactorBase, FactorBase]:
    paths = work.require(FB.format(0), FB.format(1))
    return read_factor_base(paths[0], setup), read_factor_base(paths[1], setup)


def _specs(setup: PolySetup, config: PipelineConfig) -> Tuple[SchirokauerSpec, SchirokauerSpec]:
    return (make_sm_spec(setup, 0, setup.ell, seed=config.seed),
            make_sm_spec(setup, 1, setup.ell, seed=config.seed))


def _sm_counts(setup: PolySetup) -> Tuple[int, int]:
    return unit_rank(setup.f), unit_rank(setup.g)


def stage_polyselect(work: Workdir) -> Tuple[List[Path], List[Path]]:
    config = work.config
    params = TowerParams.from_p_ell(config.p, config.ell).validate()
    setup = select_polynomials(params, config.max_s, config.max_t_coeff, config.seed)
    logger.info("Quality score %.2f", quality_score(setup, sample_primes(setup)))
    for side in (0, 1):
        alpha_image(setup, side, setup.ell)
    out = work.path(SETUP)
    with atomic_output(out) as temp:
        write_setup(temp, setup)
    return [], [out]


def stage_makefb(work: Workdir) -> Tuple[List[Path], List[Path]]:
    setup = _setup(work)
    outputs = []
    for side in (0, 1):
        fb = build_factor_base(setup, side, work.config.lpb_bound[side], work.config.workers)
        out = work.path(FB.format(side))
        with atomic_output(out) as temp:
            write_factor_base(temp, fb)
        outputs.append(out)
    return [work.path(SETUP)], outputs


def stage_sieve(work: Workdir) -> Tuple[List[Path], List[Path]]:
    config = work.config
    setup = _setup(work)
    bases = _factor_bases(work, setup)
    params = SieveParams.from_config(config)
    oracle = IdealOracle(setup, config.sq_side)
    ideals = list(special_q_ideals(oracle, config.q_range, config.sq_limit, config.sq_degree2))
    logger.info("Sieving %d special-q ideals on side %d in %s", len(ideals), config.sq_side, config.q_range)
    rels_dir = work.path(RELS_DIR)
    rels_dir.mkdir(parents=True, exist_ok=True)
    for stale in rels_dir.glob("chunk.*.txt"):
        stale.unlink()
    outputs: List[Path] = []
    lines: List[str] = []
    done = total = 0

    def flush() -> None:
        out = rels_dir / CHUNK.format(len(outputs))
        with atomic_output(out) as temp:
            temp.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        outputs.append(out)
        lines.clear()

    for ideal, relations, stats in sieve_many(setup, bases, params, ideals, config.workers,
                                              config.type2_basis):
        lines.append(sq_header(ideal))
        lines.extend(relation.to_line() for relation in relations)
        done += 1
        total += len(relations)
        if done % SPECIAL_Q_PER_CHUNK == 0:
            flush()
            logger.info("%d/%d special-q, %d relations", done, len(ideals), total)
    if lines or not outputs:
        flush()
    logger.info("Sieve: %d relations from %d special-q", total, done)
    return [work.path(SETUP), work.path(FB.format(0)), work.path(FB.format(1))], outputs


def stage_dedup(work: Workdir) -> Tuple[List[Path], List[Path]]:
    setup = _setup(work)
    chunks = work.chunks()
    relations: List[Relation] = []
    for chunk in chunks:
        relations.extend(read_relations(chunk))
    unique = remove_duplicates(relations, setup.p, setup.h)
    out = work.path(UNIQUE)
    with atomic_output(out) as temp:
        write_relations(temp, unique)
    return chunks, [out]


def stage_purge(work: Workdir) -> Tuple[List[Path], List[Path]]:
    setup = _setup(work)
    (source,) = work.require(UNIQUE)
    kept = purge(read_relations(source), sum(_sm_counts(setup)), setup.j_sides)
    out = work.path(PURGED)
    with atomic_output(out) as temp:
        write_relations(temp, kept)
    return [source], [out]


def stage_merge(work: Workdir) -> Tuple[List[Path], List[Path]]:
    setup = _setup(work)
    (source,) = work.require(PURGED)
    sets = merge(read_relations(source), work.config.merge_max_weight, setup.j_sides)
    out = work.path(RELSETS)
    with atomic_output(out) as temp:
        write_relation_sets(temp, sets, _sm_counts(setup))
    return [source], [out]


def stage_sm(work: Workdir) -> Tuple[List[Path], List[Path]]:
    setup = _setup(work)
    purged, relsets = work.require(PURGED, RELSETS)
    relations = read_relations(purged)
    sets, _ = read_relation_sets(relsets, relations, setup.j_sides)
    specs = _specs(setup, work.config)
    elements = [relation.element for relation in relations]
    cache: Dict[int, Tuple[int, ...]] = {}
    rows = [set_sm(rs, elements, specs, cache) for rs in sets]
    out = work.path(SM)
    with atomic_output(out) as temp:
        temp.write_text("".join(" ".join(str(v) for v in row) + "\n" for row in rows), encoding="utf-8")
    logger.info("Schirokauer maps for %d relation sets (%d + %d per row)", len(rows),
                specs[0].rank, specs[1].rank)
    return [purged, relsets], [out]


def read_sm_rows(path: Path) -> List[List[int]]:
    return [[int(v) for v in line.split()] for line in path.read_text(encoding="utf-8").splitlines()]


def stage_linalg(work: Workdir) -> Tuple[List[Path], List[Path]]:
    setup = _setup(work)
    purged, relsets, sm_path = work.require(PURGED, RELSETS, SM)
    sets, sm_counts = read_relation_sets(relsets, read_relations(purged), setup.j_sides)
    system = build_system(sets, read_sm_rows(sm_path), sm_counts, setup.ell)
    vector = wiedemann_nullspace(system, setup.ell, work.config.wiedemann_retries, work.config.seed)
    matrix_out, vector_out = work.path(MATRIX), work.path(NULLSPACE)
    with atomic_output(matrix_out) as temp:
        write_system(temp, system)
    with atomic_output(vector_out) as temp:
        write_vector(temp, vector)
    return [purged, relsets, sm_path], [matrix_out, vector_out]


def stage_logrecon(work: Workdir) -> Tuple[List[Path], List[Path]]:
    setup = _setup(work)
    matrix, vector, unique = work.require(MATRIX, NULLSPACE, UNIQUE)
    system = read_system(matrix, setup.ell)
    db = seed_from_nullspace(read_vector(vector), system.columns, setup.ell)
    db = reconstruct(db, read_relations(unique), _specs(setup, work.config), setup.j_sides)
    out = work.path(LOGDB)
    with atomic_output(out) as temp:
        write_logdb(temp, db)
    return [matrix, vector, unique], [out]


def stage_descent(work: Workdir) -> Tuple[List[Path], List[Path]]:
    config = work.config
    setup = _setup(work)
    bases = _factor_bases(work, setup)
    (logdb,) = work.require(LOGDB)
    db = read_logdb(logdb)
    descender = Descender(setup, bases, db, _specs(setup, config), DescentParams.from_config(config),
                          SieveParams.from_config(config))
    result = descender.compute(parse_coords(config.generator), parse_coords(config.target))
    out = work.path(DESCENT)
    with atomic_output(out) as temp:
        write_transcript(temp, result)
    return [work.path(SETUP), work.path(FB.format(0)), work.path(FB.format(1)), logdb], [out]


def stage_verify(work: Workdir) -> Tuple[List[Path], List[Path]]:
    config = work.config
    setup = _setup(work)
    (transcript,) = work.require(DESCENT)
    logs = read_transcript_logs(transcript)
    generator, target = parse_coords(config.generator), parse_coords(config.target)
    ok = verify_dlog(generator, target, logs["vlog_g"], logs["vlog_t"], setup)
    consistent = logs["log"] * logs["vlog_g"] % setup.ell == logs["vlog_t"] % setup.ell
    logger.info("verify: %s", "true" if ok and consistent else "false")
    if not (ok and consistent):
        raise ContractViolation("the discrete logarithm does not verify")
    return [transcript], []


STAGE_FUNCTIONS: Dict[str, Callable[[Workdir], Tuple[List[Path], List[Path]]]] = {
    "polyselect": stage_polyselect,
    "makefb": stage_makefb,
    "sieve": stage_sieve,
    "dedup": stage_dedup,
    "purge": stage_purge,
    "merge": stage_merge,
    "sm": stage_sm,
    "linalg": stage_linalg,
    "logrecon": stage_logrecon,
    "descent": stage_descent,
    "verify": stage_verify,
}


def run_stage(stage: str, config: PipelineConfig) -> List[Path]:
    """Run one stage, write its artifacts atomically and record it in the manifest."""
    if stage not in STAGE_FUNCTIONS:
        raise ContractViolation(f"unknown stage {stage!r}; choose from {', '.join(STAGES)}")
    work = Workdir(config)
    started = time.time()
    logger.info("Stage %s in %s", stage, work.root)
    inputs, outputs = STAGE_FUNCTIONS[stage](work)
    seconds = time.time() - started
    work.record(stage, inputs, outputs, seconds)
    logger.info("Stage %s done in %.1fs", stage, seconds)
    return outputs


def run_all(config: PipelineConfig, stages: Sequence[str] = STAGES) -> None:
    for stage in stages:
        run_stage(stage, config)
