import random
import time
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, override_settings

from stencils.exceptions import ConfigurationError, DeadlockError, ScheduleError
from stencils.grid import COMPRESSED, TWO_GRID, FillPattern, GridDims, allocate, from_field
from stencils.kernel import BlockSize, sweep_naive
from stencils import pipeline
from stencils.pipeline import (
    BARRIER, COUNTER_STRIDE, RELAXED, PipelineConfig, PipelineRunner, ThreadCounters,
    build_schedule, dependencies_met, gate_open, instrumented_run, may_proceed, run_node_sweeps,
    validate_partition,
)
from stencils.tests import GUARD, ghost_mask, guarded_field
from stencils.verify import check_pipeline, compare, equivalence_matrix, oracle


class PipelineConfigTests(SimpleTestCase):
    def test_updates_per_node_sweep(self):
        cfg = PipelineConfig(n=2, t=4, T=2, d_l=1, d_u=4)
        self.assertEqual(cfg.threads, 8)
        self.assertEqual(cfg.U, 16)

    def test_team_bounds(self):
        cfg = PipelineConfig(n=2, t=2, d_l=1, d_u=3, d_t=5)
        self.assertEqual([cfg.lower_bound(i) for i in range(4)], [6, 1, 6, 1])
        self.assertEqual([cfg.upper_bound(i) for i in range(4)], [3, 8, 3, 8])

    def test_invalid(self):
        for kwargs in ({'t': 0}, {'d_l': 2, 'd_u': 1}, {'d_t': -1}, {'sync': 'spin'}, {'storage': 'tiled'}):
            with self.subTest(**kwargs), self.assertRaises(ConfigurationError):
                PipelineConfig(**kwargs)

    @override_settings(STENCILS={'DEFAULT_TEAM_SIZE': 3, 'DEFAULT_BLOCK': (4, 4, 4)})
    def test_defaults_come_from_settings(self):
        cfg = PipelineConfig.from_settings(T=1)
        self.assertEqual((cfg.n, cfg.t, cfg.T, cfg.sync), (1, 3, 1, RELAXED))
        self.assertEqual(cfg.block_size(GridDims(16, 2, 16)), BlockSize(4, 2, 4))


class GateTests(SimpleTestCase):
    def setUp(self):
        self.cfg = PipelineConfig(n=2, t=2, d_l=1, d_u=2, d_t=3)

    def test_front_thread_has_no_lower_condition(self):
        self.assertTrue(gate_open(None, 5, 3, 0, self.cfg))
        self.assertFalse(gate_open(None, 6, 3, 0, self.cfg))

    def test_inside_a_team(self):
        self.assertFalse(gate_open(4, 4, 4, 1, self.cfg))
        self.assertTrue(gate_open(5, 4, 0, 1, self.cfg, total_blocks=10))
        # thread 1 is a team rear: d_u + d_t
        self.assertFalse(gate_open(10, 6, 0, 1, self.cfg, total_blocks=10))

    def test_team_front_waits_for_the_team_delay(self):
        self.assertFalse(gate_open(3, 0, None, 2, self.cfg))
        self.assertTrue(gate_open(4, 0, None, 2, self.cfg))

    def test_finished_predecessor_releases_the_lower_condition(self):
        self.assertFalse(gate_open(10, 10, None, 3, self.cfg))
        self.assertTrue(gate_open(10, 9, None, 3, self.cfg, total_blocks=10))

    def test_may_proceed_reads_the_counters(self):
        counters = ThreadCounters(4)
        self.assertTrue(may_proceed(counters, 0, self.cfg))
        self.assertFalse(may_proceed(counters, 1, self.cfg))
        counters.increment(0)
        self.assertTrue(may_proceed(counters, 1, self.cfg))
        with self.assertRaises(ConfigurationError):
            may_proceed(counters, 4, self.cfg)


class ThreadCountersTests(SimpleTestCase):
    def test_counters_sit_a_cache_line_apart(self):
        counters = ThreadCounters(3)
        counters.increment(2)
        counters.increment(2)
        self.assertEqual(counters.snapshot(), [0, 0, 2])
        self.assertGreaterEqual(COUNTER_STRIDE * 8, 128)
        counters.reset()
        self.assertEqual(counters.snapshot(), [0, 0, 0])
        with self.assertRaises(IndexError):
            counters[3]


class ScheduleTests(SimpleTestCase):
    def test_levels_partition_the_domain(self):
        cases = [
            (GridDims(10, 9, 7), PipelineConfig(t=2, T=2, bs=BlockSize(3, 4, 2))),
            (GridDims(8, 8, 8), PipelineConfig(n=2, t=2, T=1, bs=BlockSize(8, 8, 1))),
            (GridDims(5, 6, 7), PipelineConfig(t=4, T=1, bs=BlockSize(1, 1, 1))),
        ]
        for dims, cfg in cases:
            for reverse in (False, True):
                with self.subTest(dims=dims, reverse=reverse):
                    self.assertTrue(validate_partition(build_schedule(dims, cfg, reverse)))

    def test_widened_levels_partition_their_domains(self):
        dims = GridDims(6, 6, 6, ghost=3)
        cfg = PipelineConfig(t=3, bs=BlockSize(4, 4, 4))
        widening = [((2 - s, 0, 2 - s), (0, 2 - s, 0)) for s in range(3)]
        for reverse in (False, True):
            schedule = build_schedule(dims, cfg, reverse, widening)
            self.assertTrue(validate_partition(schedule))
            self.assertEqual(schedule.domains[0].lo, (-2, 0, -2))

    def test_regions_shift_down_by_level(self):
        schedule = build_schedule(GridDims(8, 8, 8), PipelineConfig(t=2, T=2, bs=BlockSize(4, 8, 8)))
        self.assertEqual(schedule.region(0, 0).hi[0], 4)
        self.assertEqual(schedule.region(3, 0).hi[0], 1)
        self.assertEqual(schedule.region(3, 1).lo[0], 1)

    def test_too_many_levels_for_the_grid(self):
        with self.assertRaises(ScheduleError):
            build_schedule(GridDims(4, 4, 4), PipelineConfig(t=5))

    def test_block_larger_than_grid(self):
        with self.assertRaises(ConfigurationError):
            build_schedule(GridDims(4, 4, 4), PipelineConfig(bs=BlockSize(5, 4, 4)))


class RunnerTests(SimpleTestCase):
    def test_storage_must_match(self):
        grid = allocate(GridDims.cube(8), TWO_GRID)
        with self.assertRaises(ConfigurationError):
            run_node_sweeps(grid, PipelineConfig(storage=COMPRESSED), 1)

    def test_compressed_slack_must_hold_a_node_sweep(self):
        grid = allocate(GridDims.cube(8), COMPRESSED, slack=1)
        with self.assertRaises(ConfigurationError):
            run_node_sweeps(grid, PipelineConfig(t=2, storage=COMPRESSED), 1)

    def test_barrier_and_relaxed_agree_bitwise(self):
        dims = GridDims(12, 10, 9)
        pattern = FillPattern.random(3)
        fields = []
        for sync in (BARRIER, RELAXED):
            grid = allocate(dims, TWO_GRID, pattern)
            run_node_sweeps(grid, PipelineConfig(t=3, T=2, d_u=2, sync=sync, bs=BlockSize(5, 4, 3)), 2)
            fields.append(grid.snapshot())
        np.testing.assert_array_equal(fields[0], fields[1])
        self.assertTrue(compare(fields[0], oracle(dims, pattern, 12)).bitwise)

    def test_compressed_runs_alternate_direction(self):
        dims = GridDims.cube(9)
        pattern = FillPattern.random(4)
        cfg = PipelineConfig(n=2, t=2, d_u=2, d_t=1, sync=RELAXED, storage=COMPRESSED, bs=BlockSize(4, 3, 5))
        grid = allocate(dims, COMPRESSED, pattern, slack=cfg.U)
        run_node_sweeps(grid, cfg, 3)
        self.assertFalse(grid.forward)
        self.assertEqual(grid.offset, 0)
        np.testing.assert_array_equal(grid.interior(), oracle(dims, pattern, 12)[1:-1, 1:-1, 1:-1])

    def test_failing_thread_aborts_the_sweep(self):
        cfg = PipelineConfig(t=2, sync=RELAXED)
        runner = PipelineRunner(cfg, spin_timeout=0.2)

        def broken(i, grid, schedule, block):
            if i == 0:
                raise RuntimeError('boom')
            PipelineRunner._update(runner, i, grid, schedule, block)

        runner._update = broken
        with self.assertRaises(RuntimeError):
            runner.run(allocate(GridDims.cube(6), TWO_GRID), 1)

    def test_stalled_predecessor_is_reported_as_deadlock(self):
        cfg = PipelineConfig(t=2, sync=RELAXED, d_u=1)
        runner = PipelineRunner(cfg, spin_budget=1, spin_timeout=0.05)
        runner.counters.increment(1)
        with self.assertRaises(DeadlockError):
            runner._wait(1, 10, abort=_NeverSet())


class _NeverSet:
    def is_set(self):
        return False


class OracleEquivalenceTests(SimpleTestCase):
    """Every valid configuration of the matrix reproduces the naive sweeps."""

    def test_matrix_on_48_cubed(self):
        dims = GridDims.cube(48)
        pattern = FillPattern.random(11)
        references = {}
        configs = list(equivalence_matrix(dims))
        self.assertEqual(len(configs), 288)
        for cfg in configs:
            levels = 2 * cfg.U
            if levels not in references:
                references[levels] = oracle(dims, pattern, levels)[1:-1, 1:-1, 1:-1]
            slack = cfg.U if cfg.storage == COMPRESSED else 0
            grid = allocate(dims, cfg.storage, pattern, slack)
            run_node_sweeps(grid, cfg, 2)
            with self.subTest(cfg=cfg.describe()):
                self.assertTrue(compare(grid.interior(), references[levels], 1e-13).passed)

    def test_check_pipeline(self):
        comparison = check_pipeline(
            GridDims.cube(32), PipelineConfig(n=2, t=2, T=2, d_u=4, sync=RELAXED), FillPattern.random(1), 4
        )
        self.assertTrue(comparison.passed)


class RelaxedSafetyTests(SimpleTestCase):
    def test_randomized_runs_never_open_a_closed_gate(self):
        rng = random.Random(2024)
        dims = GridDims.cube(12)
        for run in range(100):
            t = rng.choice((2, 3, 4))
            n = rng.choice((1, 2)) if t < 4 else 1
            cfg = PipelineConfig(
                n=n, t=t, T=1, d_l=1, d_u=rng.randint(1, 8), d_t=rng.choice((0, 2)),
                sync=RELAXED, bs=BlockSize(rng.randint(1, 12), rng.randint(1, 6), rng.randint(1, 6)),
            )
            total = build_schedule(dims, cfg).blocks
            grid = allocate(dims, TWO_GRID, FillPattern.random(run))
            trace = instrumented_run(grid, cfg, 1)
            with self.subTest(run=run, cfg=cfg.describe()):
                self.assertEqual(trace.violations, [])
                self.assertEqual(len(trace.events), cfg.threads * total)
                for event in trace.events:
                    if event.c_prev is None:
                        continue
                    distance = event.c_prev - event.c_self
                    if event.c_prev < total:
                        self.assertGreaterEqual(distance, cfg.lower_bound(event.thread))
                    self.assertLessEqual(distance, cfg.upper_bound(event.thread - 1) + 1)

    def test_trace_csv(self):
        trace = instrumented_run(allocate(GridDims.cube(6), TWO_GRID), PipelineConfig(t=2, sync=BARRIER), 1)
        lines = trace.to_csv().splitlines()
        self.assertEqual(lines[0], 'sweep,thread,block,c_prev,c_self,c_next')
        self.assertEqual(lines[1], '0,0,0,,0,0')


class DependencyAuditTests(SimpleTestCase):
    def setUp(self):
        self.cfg = PipelineConfig(t=3, d_l=1, d_u=2)

    def test_rule(self):
        self.assertTrue(dependencies_met(None, 7, 5, 0, self.cfg))
        self.assertTrue(dependencies_met(4, 3, 0, 1, self.cfg))
        self.assertFalse(dependencies_met(3, 3, 1, 1, self.cfg))
        self.assertTrue(dependencies_met(9, 6, 3, 1, self.cfg))
        self.assertFalse(dependencies_met(9, 7, 3, 1, self.cfg))
        self.assertTrue(dependencies_met(9, 8, None, 2, self.cfg))

    def test_barrier_offsets_satisfy_the_rule(self):
        cfg = PipelineConfig(n=2, t=2, d_l=1, d_u=1, d_t=2, sync=BARRIER, bs=BlockSize(4, 4, 4))
        trace = instrumented_run(allocate(GridDims.cube(8), TWO_GRID), cfg, 1)
        self.assertEqual(trace.violations, [])

    def test_an_open_gate_is_caught(self):
        cfg = PipelineConfig(t=4, T=1, d_u=8, sync=RELAXED, bs=BlockSize(4, 4, 4))
        original = pipeline.update_block

        def slow_front(grid, region, step, traversal):
            if step == 0:
                time.sleep(0.01)
            return original(grid, region, step, traversal)

        grid = allocate(GridDims.cube(8), TWO_GRID, FillPattern.random(4))
        with mock.patch.object(pipeline, 'gate_open', lambda *args, **kwargs: True), \
                mock.patch.object(pipeline, 'update_block', slow_front), \
                self.assertLogs('stencils.pipeline', level='WARNING'):
            trace = instrumented_run(grid, cfg, 1)
        self.assertGreater(len(trace.violations), 0)
        self.assertTrue(all(e.thread > 0 and e.c_prev <= e.c_self for e in trace.violations))


class GhostShellTests(SimpleTestCase):
    def test_guard_values_survive_pipelined_runs(self):
        dims = GridDims(12, 10, 9)
        field = guarded_field(dims, FillPattern.random(7))
        reference = from_field(field, dims, TWO_GRID)
        for _ in range(3 * 4):
            sweep_naive(reference)
        for storage in (TWO_GRID, COMPRESSED):
            cfg = PipelineConfig(t=2, T=2, d_u=2, sync=RELAXED, storage=storage, bs=BlockSize(5, 4, 3))
            grid = from_field(field, dims, storage, slack=cfg.U if storage == COMPRESSED else 0)
            with self.subTest(storage=storage):
                for _ in range(3):
                    run_node_sweeps(grid, cfg, 1)
                    np.testing.assert_array_equal(grid.current()[ghost_mask(dims)], GUARD)
                np.testing.assert_array_equal(grid.current(), reference.current())
