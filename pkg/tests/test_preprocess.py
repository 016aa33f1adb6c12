import json
import random

import pytest

from conftest import cell_rect, grid
from coverplan import RegionSpec, cspace, errors
from coverplan import cover as pre
from oracles import bfs_distances, descent_basin, simulate_descent


def grid3(obstacles=()):
    return grid(3, obstacles=obstacles, regions=(RegionSpec("r", (0.0, 0.0, 3.0, 3.0)),))


# ---------------------------------------------------------------------------
# descent / neighborhoods


def test_neighborhood_empty_3x3_covers_all():
    sc = grid3()
    nbhd, frontier = pre.construct_neighborhood(sc, (0, 0))
    members, oracle_max = descent_basin(sc, (0, 0))
    assert len(members) == 9
    assert nbhd.members == frozenset(members)
    assert nbhd.max_descent_steps == oracle_max
    assert nbhd.max_descent_steps <= 4
    assert frontier == frozenset()


def test_neighborhood_excludes_stalled_cell():
    # (2,0)'s only valid successor (2,1) has navigation value sqrt(5) > 2
    sc = grid3(obstacles=[cell_rect(1, 0)])
    nbhd, frontier = pre.construct_neighborhood(sc, (0, 0))
    members, _ = descent_basin(sc, (0, 0))
    assert (2, 0) not in nbhd.members
    assert nbhd.members == frozenset(members)
    assert (2, 0) in frontier


def test_neighborhood_enclosed_attractor():
    sc = grid(5, home=(4, 4), obstacles=[cell_rect(0, 1), cell_rect(1, 0), cell_rect(1, 1)])
    nbhd, frontier = pre.construct_neighborhood(sc, (0, 0))
    assert nbhd.members == frozenset({(0, 0)})
    assert nbhd.max_descent_steps == 0
    assert frontier == frozenset()


@pytest.mark.parametrize("seed", range(4))
def test_neighborhood_matches_per_cell_oracle(seed):
    rng = random.Random(seed)
    cells = [(i, j) for i in range(6) for j in range(6) if rng.random() < 0.25]
    sc = grid(6, home=(5, 5), obstacles=[cell_rect(i, j) for i, j in cells if (i, j) != (5, 5)])
    attractor = (0, 0) if cspace.is_valid(sc, (0, 0)) else (5, 5)
    nbhd, _ = pre.construct_neighborhood(sc, attractor)
    members, oracle_max = descent_basin(sc, attractor)
    assert nbhd.members == frozenset(members)
    assert nbhd.max_descent_steps == oracle_max


def test_descend_trivial_and_monotone():
    sc = grid3()
    p = pre.descend(sc, (0, 0), (0, 0))
    assert p.configs == ((0, 0),) and p.cost == 0.0
    p = pre.descend(sc, (2, 0), (0, 0))
    assert p.configs == ((2, 0), (1, 0), (0, 0))


def test_descend_stalls_where_oracle_stalls():
    sc = grid3(obstacles=[cell_rect(1, 0)])
    reached, _, _ = simulate_descent(sc, (2, 0), (0, 0))
    assert not reached
    with pytest.raises(errors.DescentStalled):
        pre.descend(sc, (2, 0), (0, 0))


def test_descend_bound_exceeded():
    sc = grid3()
    with pytest.raises(errors.BoundExceeded):
        pre.descend(sc, (2, 2), (0, 0), step_bound=1)


def test_descend_member_replay_equals_validity_descent():
    """For basin members the member-set replay is the offline walk exactly."""
    rng = random.Random(3)
    cells = [(i, j) for i in range(8) for j in range(8) if rng.random() < 0.2]
    sc = grid(8, obstacles=[cell_rect(i, j) for i, j in cells if (i, j) != (0, 0)])
    nbhd, _ = pre.construct_neighborhood(sc, (0, 0))
    checks_before = sc.counters.collision_checks
    for q in sorted(nbhd.members):
        replay = pre.descend(
            sc, q, (0, 0), step_bound=nbhd.max_descent_steps, member_set=nbhd.members
        )
        checks_after = sc.counters.collision_checks
        assert checks_after == checks_before  # replay does zero collision checks
        offline = pre.descend(sc, q, (0, 0))
        checks_before = sc.counters.collision_checks
        assert replay.configs == offline.configs


def test_descent_soundness_within_bound():
    sc = grid(8, obstacles=[cell_rect(4, j) for j in range(6)])
    nbhd, _ = pre.construct_neighborhood(sc, (7, 7))
    for q in sorted(nbhd.members):
        path = pre.descend(sc, q, (7, 7), step_bound=nbhd.max_descent_steps)
        assert all(cspace.is_valid(sc, c) for c in path.configs)


# ---------------------------------------------------------------------------
# sampling


def test_sampler_prefers_frontier():
    rng = random.Random(0)
    states = [(0, 0), (1, 1), (2, 2)]
    pick = pre.sample_valid_uncovered(states, {(0, 0)}, frozenset({(1, 1), (9, 9)}), rng)
    assert pick == (1, 1)


def test_sampler_deterministic_fallback():
    states = [(0, 0), (1, 1), (2, 2)]
    picks = {
        pre.sample_valid_uncovered(states, {(0, 0)}, frozenset(), random.Random(7))
        for _ in range(5)
    }
    assert len(picks) == 1
    assert picks.pop() in {(1, 1), (2, 2)}


def test_sampler_exhausted():
    states = [(0, 0)]
    assert pre.sample_valid_uncovered(states, {(0, 0)}, frozenset(), random.Random(0)) is None


# ---------------------------------------------------------------------------
# preprocess


def test_preprocess_single_cell_region():
    sc = grid(8, regions=(RegionSpec("one", (5.0, 5.0, 6.0, 6.0)),))
    lib = pre.preprocess(sc)
    rc = lib.regions[0]
    assert len(rc.entries) == 1
    assert (5, 5) in rc.entries[0].members
    assert rc.covered == frozenset({(5, 5)})
    assert rc.excluded == frozenset()


def test_preprocess_split_region_covers_both_components():
    # Wall splits the 2x2 region into two parts, both reachable from home
    # around the wall's ends.
    region = RegionSpec("r", (4.0, 3.0, 6.0, 5.0))
    sc = grid(
        8,
        regions=(region,),
        obstacles=[cell_rect(4, 4), cell_rect(5, 3)],  # block region diagonal
    )
    region_states = [q for q in cspace.lattice_configs(sc) if cspace.in_region(sc, region, q)]
    assert set(region_states) == {(4, 3), (5, 4)}
    lib = pre.preprocess(sc)
    rc = lib.regions[0]
    assert rc.covered == set(region_states)
    assert rc.excluded == frozenset()
    covered_by_entries = set()
    for e in rc.entries:
        covered_by_entries |= e.members & set(region_states)
    assert covered_by_entries == set(region_states)


def test_preprocess_unreachable_region_excluded():
    # Region sealed off from home by a full wall.
    obstacles = [cell_rect(5, j) for j in range(8)]
    region = RegionSpec("locked", (6.0, 6.0, 8.0, 8.0))
    sc = grid(8, regions=(region,), obstacles=obstacles)
    lib = pre.preprocess(sc)
    rc = lib.regions[0]
    assert rc.entries == ()
    assert rc.covered == frozenset()
    assert len(rc.excluded) == 4  # cells (6..7, 6..7)


def test_preprocess_home_invalid():
    sc = grid(8, obstacles=[cell_rect(0, 0)])
    with pytest.raises(errors.HomeInvalid):
        pre.preprocess(sc)


def test_cover_completeness_against_bfs(two_region_grid12):
    sc = grid(
        12,
        home=(0, 6),
        regions=two_region_grid12.regions,
        obstacles=[cell_rect(6, j) for j in range(1, 11)] + [cell_rect(9, 2)],
    )
    lib = pre.preprocess(sc, seed=5)
    reach = set(bfs_distances(sc, sc.s_home))
    for region, rc in zip(sc.regions, lib.regions):
        for q in cspace.lattice_configs(sc):
            if not cspace.in_region(sc, region, q):
                continue
            if q in reach:
                assert q in rc.covered, q
            else:
                assert q in rc.excluded, q


def test_rep_paths_start_home_end_attractor(two_region_grid12):
    lib = pre.preprocess(two_region_grid12, seed=2)
    from coverplan.search import path_is_valid

    for rc in lib.regions:
        for e in rc.entries:
            rep = e.rep_path
            assert rep.configs[0] == two_region_grid12.s_home
            assert rep.configs[-1] == e.attractor
            assert path_is_valid(two_region_grid12, rep)


def test_preprocess_deterministic(two_region_grid12):
    a = pre.preprocess(two_region_grid12, seed=9)
    b = pre.preprocess(two_region_grid12, seed=9)
    assert pre.library_to_payload(a) == pre.library_to_payload(b)


# ---------------------------------------------------------------------------
# persistence


def test_library_round_trip(tmp_path, two_region_grid12):
    lib = pre.preprocess(two_region_grid12, seed=1)
    path = tmp_path / "lib.json"
    pre.save_library(lib, path)
    again = pre.load_library(path, two_region_grid12)
    assert again == lib


def test_library_bit_stable(tmp_path, two_region_grid12):
    lib = pre.preprocess(two_region_grid12, seed=1)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    pre.save_library(lib, p1)
    pre.save_library(pre.load_library(p1, two_region_grid12), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_library_fingerprint_mismatch(tmp_path, two_region_grid12):
    lib = pre.preprocess(two_region_grid12, seed=1)
    path = tmp_path / "lib.json"
    pre.save_library(lib, path)
    edited = grid(
        12,
        home=(0, 6),
        regions=two_region_grid12.regions,
        obstacles=[cell_rect(3, 3)],
    )
    with pytest.raises(errors.FingerprintMismatch):
        pre.load_library(path, edited)


def test_library_truncated_file(tmp_path, two_region_grid12):
    lib = pre.preprocess(two_region_grid12, seed=1)
    path = tmp_path / "lib.json"
    pre.save_library(lib, path)
    blob = path.read_text()
    path.write_text(blob[: len(blob) // 2])
    with pytest.raises(errors.CorruptLibrary):
        pre.load_library(path, two_region_grid12)


def test_library_version_error(tmp_path, two_region_grid12):
    lib = pre.preprocess(two_region_grid12, seed=1)
    payload = pre.library_to_payload(lib)
    payload["format_version"] = 99
    path = tmp_path / "lib.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(errors.LibraryVersionError):
        pre.load_library(path, two_region_grid12)


def test_member_encoding_round_trip():
    dims = (5, 7, 3)
    configs = {(0, 0, 0), (4, 6, 2), (2, 3, 1), (1, 0, 2)}
    assert pre._decode_set(pre._encode_set(configs, dims), dims) == configs
