"""
Unit Tests for modules/structured/

Tests:
- Partition parsing and label resolution
- Hierarchy validation (references, cycles, ordering)
- Residual block fitting and staged fits
- compose_step / stage_residual / joint comparison
- Archive round trip
"""

from pathlib import Path

import numpy as np
import pytest

from common.config import DEFAULT_SETTINGS
from common.errors import DataError, HierarchyError
from common.storage import LocalDirectoryStore
from modules.data.models import SnapshotPair, frozen_array
from modules.impact import impact_score
from modules.koopman import ridge_solve
from modules.structured import (
    Group,
    KnownRef,
    Partition,
    StageSpec,
    compare_with_joint_fit,
    compose_step,
    fit_residual_block,
    hierarchy_from_dict,
    load_archive,
    load_hierarchy,
    residual_target,
    save_archive,
    stage_residual,
    staged_fit,
    validate_stages,
)

HOST = ("h1", "h2", "h3")
CIRCUIT = ("c1", "c2")
NAND_HIERARCHY = Path(DEFAULT_SETTINGS).parent / "hierarchies" / "nand.yaml"


def two_stage(composite_third: bool = False):
    stages = [
        StageSpec("a", "host", "H", ("H",), block_name="K_H"),
        StageSpec("b", "circuit", "H", ("C",), known=(KnownRef("a", "H"),), block_name="K_HC"),
    ]
    if composite_third:
        stages.append(StageSpec(
            "c", "circuit", "H", ("H", "C"), known=(KnownRef("a"), KnownRef("b")),
            block_name="K_corr", composite=True,
        ))
    return stages


@pytest.fixture
def partition() -> Partition:
    return Partition.from_dict({"H": list(HOST), "C": list(CIRCUIT)})


@pytest.fixture
def planted(rng):
    """Host-only and host+circuit pairs generated from known K_HH and K_HC."""
    K_HH = 0.3 * rng.standard_normal((3, 3))
    K_HC = 0.2 * rng.standard_normal((3, 2))

    host_past = rng.standard_normal((3, 10))
    host = SnapshotPair(HOST, frozen_array(host_past), frozen_array(K_HH @ host_past))

    past = rng.standard_normal((5, 12))
    future = np.vstack([K_HH @ past[:3] + K_HC @ past[3:], 0.5 * past[3:]])
    circuit = SnapshotPair(HOST + CIRCUIT, frozen_array(past), frozen_array(future))
    return {"K_HH": K_HH, "K_HC": K_HC, "datasets": {"host": host, "circuit": circuit}}


@pytest.mark.unit
class TestPartition:
    """Test partition parsing and resolution."""

    def test_mapping_form(self, partition):
        """A mapping group_id -> members keeps declared order."""
        assert partition.group_ids == ["H", "C"]
        assert partition.members(["C", "H"]) == list(CIRCUIT + HOST)

    def test_overlap_rejected(self):
        """A label in two groups is a hierarchy error."""
        with pytest.raises(HierarchyError, match="'h1' belongs to groups"):
            Partition.from_dict({"H": ["h1", "h2"], "C": ["h1"]})

    def test_pattern_resolution(self):
        """Patterns expand against labels, skipping explicitly listed ones."""
        raw = Partition.from_dict([
            {"id": "H", "members": "*"},
            {"id": "C", "members": ["c1"]},
        ])
        resolved = raw.resolve(["g2", "c1", "g1"])
        assert resolved.group("H").members == ("g2", "g1")
        assert resolved.group("C").members == ("c1",)

    def test_uncovered_labels(self):
        """Every label must belong to some group."""
        with pytest.raises(HierarchyError, match="not assigned"):
            Partition.from_dict({"H": ["h1"]}).resolve(["h1", "x9"])

    def test_empty_pattern(self):
        with pytest.raises(HierarchyError, match="matches no labels"):
            Partition((Group("H", pattern="H*"),)).resolve(["g1"])

    def test_unknown_group(self, partition):
        with pytest.raises(HierarchyError, match="Group 'Z' not found"):
            partition.group("Z")


@pytest.mark.unit
class TestHierarchyValidation:
    """Test stage-graph checks."""

    def test_unknown_reference(self):
        """Unresolved references name the offending stage."""
        stages = [StageSpec("a", "wt", "H", ("H",), known=(KnownRef("zz"),))]
        with pytest.raises(HierarchyError, match="Stage 'a' references unknown stage 'zz'"):
            validate_stages(stages)

    def test_cycle(self):
        """Cycles are reported with the stages that form them."""
        stages = [
            StageSpec("a", "wt", "H", ("H",), known=(KnownRef("b"),)),
            StageSpec("b", "wt", "H", ("C",), known=(KnownRef("a"),)),
        ]
        with pytest.raises(HierarchyError, match="cycle detected: . -> . -> .") as exc:
            validate_stages(stages)
        assert "a" in str(exc.value) and "b" in str(exc.value)

    def test_forward_reference(self):
        """References must point to earlier stages."""
        stages = [
            StageSpec("b", "wt", "H", ("C",), known=(KnownRef("a"),)),
            StageSpec("a", "wt", "H", ("H",)),
        ]
        with pytest.raises(HierarchyError, match="not declared before"):
            validate_stages(stages)

    def test_duplicate_ids(self):
        stages = [StageSpec("a", "wt", "H", ("H",)), StageSpec("a", "wt", "H", ("C",))]
        with pytest.raises(HierarchyError, match="Duplicate stage ids"):
            validate_stages(stages)

    def test_stage_from_dict(self):
        """Stage dicts accept a string shorthand for known references."""
        spec = StageSpec.from_dict({
            "stage_id": "b", "condition": "iptg", "target_group": "H",
            "known": ["a", {"stage": "a", "group": "H"}], "learn": ["I"], "lambda": 0.1,
        })
        assert spec.known == (KnownRef("a"), KnownRef("a", "H"))
        assert spec.depends_on == ("a",)
        assert spec.lambda_ == 0.1
        assert spec.block_name == "b"
        assert StageSpec.from_dict(spec.to_dict()) == spec

    def test_missing_field(self):
        with pytest.raises(HierarchyError, match="lacks field"):
            StageSpec.from_dict({"stage_id": "a", "learn": ["H"]})

    def test_nand_hierarchy(self):
        """The shipped NAND design has six stages ending in a composite stage."""
        hierarchy = load_hierarchy(NAND_HIERARCHY)
        assert [s.block_name for s in hierarchy.stages] == [
            "K_H", "K_HI", "K_HA", "K_HIPY", "K_HARY", "K_HAIRPY"
        ]
        assert hierarchy.stages[-1].composite
        assert hierarchy.stages[-1].depends_on == ("a", "b", "c", "d", "e")
        assert hierarchy.partition.group("H").pattern == "H*"

    def test_hierarchy_without_stages(self):
        with pytest.raises(HierarchyError, match="no stages"):
            hierarchy_from_dict({"partition": {"H": ["h1"]}, "stages": []})

    @pytest.mark.parametrize("stage", [
        {"stage_id": "a", "condition": "wt", "target_group": "H", "learn": ["H"], "lambda": "abc"},
        {"stage_id": "a", "condition": "wt", "target_group": "H", "learn": None},
        {"stage_id": "a", "condition": "wt", "target_group": "H", "learn": ["H"], "known": [3]},
        "a",
        ["a", "wt"],
    ])
    def test_malformed_stage(self, stage):
        """Wrong types in a stage definition surface as hierarchy errors."""
        with pytest.raises(HierarchyError):
            hierarchy_from_dict({"partition": {"H": ["h1"]}, "stages": [stage]})

    @pytest.mark.parametrize("overrides", [
        {"partition": "H"},
        {"partition": [{"members": ["h1"]}]},
        {"partition": {"H": 5}},
        {"lambda": "big"},
    ])
    def test_malformed_hierarchy(self, overrides):
        stage = {"stage_id": "a", "condition": "wt", "target_group": "H", "learn": ["H"]}
        data = {"partition": {"H": ["h1"]}, "stages": [stage], **overrides}
        with pytest.raises(HierarchyError):
            hierarchy_from_dict(data)


@pytest.mark.unit
class TestFitResidualBlock:
    """Test the residual ridge fit."""

    def test_recovers_planted_block(self, rng):
        """With the known terms exact, the planted block comes back at λ = 0."""
        K1 = rng.standard_normal((4, 3))
        B = rng.standard_normal((4, 2))
        P1 = rng.standard_normal((3, 15))
        P2 = rng.standard_normal((2, 15))
        block = fit_residual_block([(K1, P1)], K1 @ P1 + B @ P2, P2, 0.0)
        np.testing.assert_allclose(block, B, atol=1e-10)

    def test_no_known_terms_is_plain_ridge(self, rng):
        """Without known terms the fit equals the unstructured ridge solution."""
        F = rng.standard_normal((2, 8))
        P = rng.standard_normal((3, 8))
        np.testing.assert_allclose(fit_residual_block([], F, P, 0.2), ridge_solve(F, P, 0.2)[0])

    def test_residual_target(self, rng):
        K = rng.standard_normal((2, 2))
        P = rng.standard_normal((2, 5))
        F = rng.standard_normal((2, 5))
        np.testing.assert_allclose(residual_target([(K, P)], F), F - K @ P)

    def test_shape_mismatch(self, rng):
        with pytest.raises(DataError, match="Known term 0"):
            residual_target([(np.ones((2, 3)), np.ones((2, 5)))], np.ones((2, 5)))


@pytest.mark.unit
class TestStagedFit:
    """Test sequential stage execution."""

    def test_recovers_blocks(self, planted, partition):
        """Host block from host data, circuit block from the residual."""
        model = staged_fit(two_stage(), planted["datasets"], partition, default_lambda=0.0)
        np.testing.assert_allclose(model.block("K_H").matrix, planted["K_HH"], atol=1e-10)
        np.testing.assert_allclose(model.block("K_HC").matrix, planted["K_HC"], atol=1e-10)
        assert model.provenance == {"a": (), "b": ("a",)}
        assert model.stage("b").frozen[0].group == "H"

    @pytest.mark.parametrize("sigma", [1e-3, 1e-2, 1e-1])
    def test_decoupled_under_noise(self, rng, partition, sigma):
        """Measurement noise alone keeps the cross block's score below 3 sigma."""
        K_HH = 0.3 * rng.standard_normal((3, 3))
        host_past = rng.standard_normal((3, 200))
        past = rng.standard_normal((5, 200))
        host_future = K_HH @ host_past + sigma * rng.standard_normal((3, 200))
        future = np.vstack([K_HH @ past[:3], 0.5 * past[3:]])
        future += sigma * rng.standard_normal((5, 200))
        datasets = {
            "host": SnapshotPair(HOST, frozen_array(host_past), frozen_array(host_future)),
            "circuit": SnapshotPair(HOST + CIRCUIT, frozen_array(past), frozen_array(future)),
        }
        model = staged_fit(two_stage(), datasets, partition)
        assert impact_score(model.block("K_HC").matrix) < 3 * sigma

    def test_blocks_are_read_only(self, planted, partition):
        model = staged_fit(two_stage(), planted["datasets"], partition, default_lambda=0.0)
        with pytest.raises(ValueError):
            model.block("K_HC").matrix[0, 0] = 1.0

    def test_stage_lambda_wins(self, planted, partition):
        """A stage's own lambda overrides the default."""
        stages = two_stage()
        stages[1] = StageSpec("b", "circuit", "H", ("C",), known=(KnownRef("a", "H"),),
                              lambda_=0.25)
        model = staged_fit(stages, planted["datasets"], partition, default_lambda=0.0)
        assert model.stage("a").lambda_ == 0.0
        assert model.stage("b").lambda_ == 0.25

    def test_missing_condition(self, planted, partition):
        """A stage whose condition has no data is named in the error."""
        datasets = {"host": planted["datasets"]["host"]}
        with pytest.raises(HierarchyError, match="Stage 'b' needs condition 'circuit'"):
            staged_fit(two_stage(), datasets, partition)

    def test_unresolved_partition(self, planted):
        raw = Partition((Group("H", pattern="h*"), Group("C", CIRCUIT)))
        with pytest.raises(HierarchyError, match="not resolved"):
            staged_fit(two_stage(), planted["datasets"], raw)

    def test_overlap_requires_composite(self, planted, partition):
        """Learning a group that already carries a frozen block needs composite."""
        stages = two_stage()
        stages.append(StageSpec("c", "circuit", "H", ("H",), known=(KnownRef("a"),)))
        with pytest.raises(HierarchyError, match="composite"):
            staged_fit(stages, planted["datasets"], partition)

    def test_composite_stage(self, planted, partition):
        """A composite stage learns a correction over already-frozen groups."""
        model = staged_fit(two_stage(True), planted["datasets"], partition, default_lambda=0.0)
        correction = model.stage("c")
        assert set(correction.group_blocks) == {"H", "C"}
        assert correction.group_col_labels("C") == CIRCUIT
        # nothing is left to explain
        np.testing.assert_allclose(correction.matrix, 0.0, atol=1e-9)
        assert model.group_block("c", "H").shape == (3, 3)

    def test_condition_without_group(self, planted, partition):
        """A stage cannot learn a group its condition does not measure."""
        stages = [StageSpec("a", "host", "H", ("C",))]
        with pytest.raises(HierarchyError, match="absent from condition 'host'"):
            staged_fit(stages, planted["datasets"], partition)


@pytest.mark.unit
class TestUsingModels:
    """Test compose_step, stage_residual and the joint comparison."""

    def test_compose_step(self, planted, partition, rng):
        """Next host state = frozen host block + learned circuit block."""
        model = staged_fit(two_stage(), planted["datasets"], partition, default_lambda=0.0)
        x = rng.standard_normal(5)
        expected = planted["K_HH"] @ x[:3] + planted["K_HC"] @ x[3:]
        np.testing.assert_allclose(compose_step(model, "b", x), expected, atol=1e-10)

    def test_compose_step_by_labels(self, planted, partition, rng):
        """State entries are matched by label, not position."""
        model = staged_fit(two_stage(), planted["datasets"], partition, default_lambda=0.0)
        x = rng.standard_normal(5)
        labels = CIRCUIT + HOST
        shuffled = np.concatenate([x[3:], x[:3]])
        np.testing.assert_allclose(
            compose_step(model, "b", shuffled, labels), compose_step(model, "b", x)
        )

    def test_stage_residual_matches_fit(self, planted, partition):
        """Recomputing from stored blocks gives the residual recorded at fit time."""
        model = staged_fit(two_stage(), planted["datasets"], partition, default_lambda=0.1)
        recomputed = stage_residual(model, "b", planted["datasets"]["circuit"])
        assert recomputed == pytest.approx(model.stage("b").residual_fro, rel=1e-10)

    def test_joint_fit_agrees_when_decoupled(self, rng, partition):
        """Without coupling the joint fit's host block equals the frozen host block."""
        K_HH = 0.3 * rng.standard_normal((3, 3))
        host_past = rng.standard_normal((3, 10))
        past = rng.standard_normal((5, 12))
        future = np.vstack([K_HH @ past[:3], past[3:]])
        datasets = {
            "host": SnapshotPair(HOST, frozen_array(host_past), frozen_array(K_HH @ host_past)),
            "circuit": SnapshotPair(HOST + CIRCUIT, frozen_array(past), frozen_array(future)),
        }
        model = staged_fit(two_stage(), datasets, partition, default_lambda=0.0)
        comparison = compare_with_joint_fit(model, "b", datasets["circuit"], lambda_=0.0)
        assert comparison.col_labels == HOST + CIRCUIT
        assert comparison.differences["H"] < 1e-8
        assert comparison.differences["C"] < 1e-8


@pytest.mark.unit
class TestArchive:
    """Test blocks/*.csv + provenance.json."""

    def test_round_trip(self, planted, partition, tmp_path):
        """A loaded archive has the same blocks, frozen terms and provenance."""
        model = staged_fit(two_stage(True), planted["datasets"], partition, default_lambda=0.0)
        store = LocalDirectoryStore(tmp_path)
        save_archive(model, store, "abc123")
        assert store.list("blocks/") == [
            "blocks/K_H.csv", "blocks/K_HC.csv", "blocks/K_corr.csv"
        ]

        loaded, record = load_archive(tmp_path)
        assert record["config_hash"] == "abc123"
        assert loaded.block_names == model.block_names
        assert loaded.provenance == model.provenance
        for name in model.block_names:
            np.testing.assert_array_equal(loaded.block(name).matrix, model.block(name).matrix)
        assert [t.group for t in loaded.stage("c").frozen] == ["H", "C"]
        assert loaded.stage("b").state_labels == HOST + CIRCUIT

    def test_unknown_block(self, planted, partition):
        model = staged_fit(two_stage(), planted["datasets"], partition, default_lambda=0.0)
        with pytest.raises(HierarchyError, match="Block 'K_XY' not found"):
            model.block("K_XY")
