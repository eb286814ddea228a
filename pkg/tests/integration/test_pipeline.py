"""
Integration Tests: Command-Line Pipeline

Runs the subcommands in-process through the unified CLI, in a temporary
directory: synth/simulate → fit / staged-fit → impact / heatmap.

Test Pyramid Layer: INTEGRATION
Scope: Multiple modules working together, real files on disk
"""
import json
from pathlib import Path

import pandas as pd
import pytest

import cli

SIX_BLOCKS = ["K_H", "K_HA", "K_HAIRPY", "K_HARY", "K_HI", "K_HIPY"]


def run(capsys, *argv):
    """Run one subcommand; return (exit code, stdout, last stderr line)."""
    code = cli.main([str(a) for a in argv])
    captured = capsys.readouterr()
    lines = captured.err.strip().splitlines()
    return code, captured.out, lines[-1] if lines else ""


@pytest.fixture(scope="module")
def toy_dir(tmp_path_factory) -> Path:
    """A small toy transcriptome written by ``synth``."""
    root = tmp_path_factory.mktemp("toy")
    settings = root / "synth.yaml"
    settings.write_text("synth:\n  toy:\n    n_genes: 40\n")
    assert cli.main(["synth", "--config", str(settings), "--out", str(root / "data")]) == 0
    return root / "data"


@pytest.fixture(scope="module")
def oscillator_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("osc")
    assert cli.main(["simulate", "--out", str(root / "data")]) == 0
    return root / "data"


# =============================================================================
# INT-1: SYNTH → STAGED-FIT → IMPACT
# =============================================================================

@pytest.mark.integration
class TestSynthToImpact:
    """INT-1: The toy dataset flows through the six-stage hierarchy into a report."""

    def test_synth_outputs(self, toy_dir):
        """synth writes table, manifest, hierarchy, ground truth and a run config."""
        for name in ("expression.csv", "manifest.json", "hierarchy.yaml", "run.yaml"):
            assert (toy_dir / name).is_file()
        assert (toy_dir / "truth" / "H-R.csv").is_file()
        header = (toy_dir / "expression.csv").read_text().splitlines()[0]
        assert header.startswith("id,")

    def test_staged_fit_writes_six_blocks(self, toy_dir, tmp_path, capsys):
        """One block file per stage plus provenance; residuals on stdout."""
        code, out, _ = run(capsys, "staged-fit", "--config", toy_dir / "run.yaml",
                           "--out", tmp_path)
        assert code == 0
        assert sorted(p.stem for p in (tmp_path / "blocks").glob("*.csv")) == SIX_BLOCKS
        provenance = json.loads((tmp_path / "provenance.json").read_text())
        assert provenance["provenance"]["f"] == ["a", "b", "c", "d", "e"]
        assert len(provenance["config_hash"]) == 64
        assert len(out.strip().splitlines()) == 6
        assert "residual=" in out

    def test_impact_report_and_heatmaps(self, toy_dir, tmp_path, capsys):
        """impact writes the JSON report, one SVG per block and echoes the ranking."""
        run(capsys, "staged-fit", "--config", toy_dir / "run.yaml", "--out", tmp_path)
        code, out, _ = run(capsys, "impact", "--config", toy_dir / "run.yaml", "--out", tmp_path)
        assert code == 0

        report = json.loads((tmp_path / "impact_report.json").read_text())
        assert sorted(e["block_id"] for e in report["entries"]) == SIX_BLOCKS
        assert sorted(p.stem for p in (tmp_path / "heatmaps").glob("*.svg")) == SIX_BLOCKS
        provenance = json.loads((tmp_path / "provenance.json").read_text())
        assert report["config_hash"] == provenance["config_hash"]
        for svg in (tmp_path / "heatmaps").glob("*.svg"):
            assert f"config_hash={report['config_hash']}" in svg.read_text()

        lines = out.strip().splitlines()
        assert lines[0] == "rule: relative(0.01)"
        assert lines[1].startswith(f"1. {report['ranking'][0]}")

    def test_block_csv_matches_partition(self, toy_dir, tmp_path, capsys):
        """K_HARY has host rows and the R then Y columns."""
        run(capsys, "staged-fit", "--config", toy_dir / "run.yaml", "--out", tmp_path)
        block = pd.read_csv(tmp_path / "blocks" / "K_HARY.csv", index_col=0)
        assert list(block.columns) == ["R1", "R2", "Y1"]
        assert block.shape == (40, 3)
        assert block.index[0] == "H001"


# =============================================================================
# INT-2: SIMULATE → FIT
# =============================================================================

@pytest.mark.integration
class TestSimulateToFit:
    """INT-2: Simulated oscillators feed the plain Koopman fit."""

    def test_exact_fit(self, oscillator_dir, tmp_path, capsys):
        """At λ = 0 the fit interpolates and recovers the propagator."""
        code, out, _ = run(capsys, "fit", "--config", oscillator_dir / "run.yaml",
                           "--out", tmp_path, "--lambda", "0")
        assert code == 0
        residual = float(out.splitlines()[0].split(":")[1])
        assert residual <= 1e-10
        assert len([line for line in out.splitlines() if line.startswith("eigenvalue")]) == 4

        meta = json.loads((tmp_path / "fit_meta.json").read_text())
        assert meta["recovery_error"] < 1e-8
        assert meta["condition"] == "coupled"
        assert meta["fit_meta"]["lambda"] == 0.0
        assert (tmp_path / "model.csv").is_file()

    def test_dump_pairs(self, oscillator_dir, tmp_path, capsys):
        code, _, _ = run(capsys, "fit", "--config", oscillator_dir / "run.yaml",
                         "--out", tmp_path, "--dump-pairs")
        assert code == 0
        pairs = pd.read_csv(tmp_path / "pairs.csv")
        assert len(pairs) == 200
        assert set(pairs["augmented"]) == {0}

    def test_augmented_fit(self, oscillator_dir, tmp_path, capsys):
        """A run config can switch augmentation on."""
        config = oscillator_dir / "run_augmented.yaml"
        config.write_text(
            (oscillator_dir / "run.yaml").read_text()
            + "fit:\n  augmentation:\n    count: 2\n    magnitude: 1.0e-4\n"
        )
        code, _, _ = run(capsys, "fit", "--config", config, "--out", tmp_path / "m")
        assert code == 0
        meta = json.loads((tmp_path / "m" / "fit_meta.json").read_text())
        assert meta["fit_meta"]["column_count"] == 200 * 3
        assert meta["fit_meta"]["augmentation"]["count"] == 2

    def test_block_system(self, tmp_path, capsys):
        """simulate can also write a planted block system with its ground truth."""
        config = tmp_path / "blocks.yaml"
        config.write_text("synth:\n  system: blocks\n")
        code, _, _ = run(capsys, "simulate", "--config", config, "--out", tmp_path / "data")
        assert code == 0
        truth = pd.read_csv(tmp_path / "data" / "truth" / "O-A.csv", index_col=0)
        assert list(truth.columns) == ["A0", "A1"]
        assert list(truth.index) == ["O0", "O1", "O2"]

    def test_zero_block_scores_zero(self, tmp_path, capsys):
        """Uncoupled oscillators give an all-zero interaction block with score 0."""
        config = tmp_path / "uncoupled.yaml"
        config.write_text("synth:\n  oscillator:\n    k_c: 0.0\n")
        assert run(capsys, "simulate", "--config", config, "--out", tmp_path / "data")[0] == 0
        run_config = tmp_path / "data" / "run.yaml"
        assert run(capsys, "staged-fit", "--config", run_config, "--out", tmp_path / "a")[0] == 0
        assert run(capsys, "impact", "--config", run_config, "--out", tmp_path / "a")[0] == 0

        report = json.loads((tmp_path / "a" / "impact_report.json").read_text())
        entries = {e["block_id"]: e for e in report["entries"]}
        assert entries["K_OA"]["score"] == 0.0
        assert entries["K_OA"]["impacted_count"] == 0


# =============================================================================
# INT-3: HEATMAP
# =============================================================================

@pytest.mark.integration
class TestHeatmapCommand:
    """INT-3: Any labelled matrix CSV renders to SVG."""

    def test_render(self, tmp_path, capsys):
        matrix = tmp_path / "K.csv"
        matrix.write_text("target,a,b\nr1,0.5,-1.0\nr2,0.0,0.25\n")
        code, out, _ = run(capsys, "heatmap", matrix, "--title", "K", "--bounds", "2")
        assert code == 0
        assert out.strip() == str(tmp_path / "K.svg")
        assert (tmp_path / "K.svg").read_bytes().lstrip().startswith(b"<?xml")


# =============================================================================
# INT-4: FAILURES → EXIT CODES
# =============================================================================

@pytest.mark.integration
class TestFailures:
    """INT-4: Module errors become one JSON line on stderr and a nonzero exit."""

    def test_missing_manifest(self, table_files, tmp_path, capsys):
        config = tmp_path / "run.yaml"
        config.write_text(
            f"inputs:\n  table: {table_files['table']}\n  manifest: missing.json\n"
        )
        code, _, err = run(capsys, "fit", "--config", config, "--out", tmp_path / "o")
        record = json.loads(err)
        assert code == 2
        assert record["error"] == "ConfigError"
        assert "missing.json" in record["message"]

    def test_bad_cell_is_data_error(self, table_files, tmp_path, capsys):
        table = tmp_path / "bad.csv"
        table.write_text(table_files["table"].read_text().replace("0.125", "abc"))
        config = tmp_path / "run.yaml"
        config.write_text(f"inputs:\n  table: bad.csv\n  manifest: {table_files['manifest']}\n")
        code, _, err = run(capsys, "fit", "--config", config, "--out", tmp_path / "o")
        assert code == 3
        assert json.loads(err)["exit_code"] == 3

    def test_cycle(self, table_files, tmp_path, capsys):
        """A cyclic hierarchy fails with the cycle spelled out."""
        hierarchy = tmp_path / "h.yaml"
        hierarchy.write_text(
            "partition: {H: [geneA], C: [geneB]}\n"
            "stages:\n"
            "  - {stage_id: a, condition: wt, target_group: H, learn: [H], known: [b]}\n"
            "  - {stage_id: b, condition: wt, target_group: H, learn: [C], known: [a]}\n"
        )
        config = tmp_path / "run.yaml"
        config.write_text(
            f"inputs:\n  table: {table_files['table']}\n  manifest: {table_files['manifest']}\n"
            f"  hierarchy: h.yaml\n"
        )
        code, _, err = run(capsys, "staged-fit", "--config", config, "--out", tmp_path / "o")
        assert code == 2
        assert "cycle detected" in json.loads(err)["message"]

    def test_unresolved_reference(self, table_files, tmp_path, capsys):
        hierarchy = tmp_path / "h.yaml"
        hierarchy.write_text(
            "partition: {H: [geneA], C: [geneB]}\n"
            "stages:\n"
            "  - {stage_id: a, condition: wt, target_group: H, learn: [H]}\n"
            "  - {stage_id: b, condition: wt, target_group: H, learn: [C], known: [zz]}\n"
        )
        config = tmp_path / "run.yaml"
        config.write_text(
            f"inputs:\n  table: {table_files['table']}\n  manifest: {table_files['manifest']}\n"
            f"  hierarchy: h.yaml\n"
        )
        code, _, err = run(capsys, "staged-fit", "--config", config, "--out", tmp_path / "o")
        assert code == 2
        assert "Stage 'b' references unknown stage 'zz'" in json.loads(err)["message"]

    def test_unknown_block(self, toy_dir, tmp_path, capsys):
        """Requesting K_XY lists the blocks that exist."""
        run(capsys, "staged-fit", "--config", toy_dir / "run.yaml", "--out", tmp_path)
        config = toy_dir / "run_unknown_block.yaml"
        config.write_text((toy_dir / "run.yaml").read_text() + "impact:\n  blocks: [K_XY]\n")
        code, _, err = run(capsys, "impact", "--config", config, "--out", tmp_path)
        message = json.loads(err)["message"]
        assert code == 2
        assert "Block 'K_XY' not found" in message
        assert "K_HARY" in message

    def test_hash_mismatch_needs_force(self, toy_dir, tmp_path, capsys):
        """An archive built from another config is refused unless --force is given."""
        run(capsys, "staged-fit", "--config", toy_dir / "run.yaml", "--out", tmp_path)
        code, _, err = run(capsys, "impact", "--config", toy_dir / "run.yaml",
                           "--out", tmp_path, "--lambda", "0.5")
        assert code == 2
        assert "--force" in json.loads(err)["message"]

        code, _, _ = run(capsys, "impact", "--config", toy_dir / "run.yaml",
                         "--out", tmp_path, "--lambda", "0.5", "--force")
        assert code == 0

    @pytest.mark.parametrize("stage", [
        "{stage_id: a, condition: wt, target_group: H, learn: [H], lambda: abc}",
        "just-a-name",
        "{stage_id: a, condition: wt, target_group: H, learn: [H], known: [{group: H}]}",
    ])
    def test_malformed_stage_is_hierarchy_error(self, table_files, tmp_path, capsys, stage):
        """Unparseable stage fields exit 2 with a JSON line, not a traceback."""
        hierarchy = tmp_path / "h.yaml"
        hierarchy.write_text(f"partition: {{H: [geneA], C: [geneB]}}\nstages:\n  - {stage}\n")
        config = tmp_path / "run.yaml"
        config.write_text(
            f"inputs:\n  table: {table_files['table']}\n  manifest: {table_files['manifest']}\n"
            f"  hierarchy: h.yaml\n"
        )
        code, _, err = run(capsys, "staged-fit", "--config", config, "--out", tmp_path / "o")
        record = json.loads(err)
        assert code == 2
        assert record["error"] == "HierarchyError"

    def test_hierarchy_lambda_not_a_number(self, table_files, tmp_path, capsys):
        hierarchy = tmp_path / "h.yaml"
        hierarchy.write_text(
            "lambda: [1]\npartition: {H: [geneA], C: [geneB]}\n"
            "stages:\n  - {stage_id: a, condition: wt, target_group: H, learn: [H]}\n"
        )
        config = tmp_path / "run.yaml"
        config.write_text(
            f"inputs:\n  table: {table_files['table']}\n  manifest: {table_files['manifest']}\n"
            f"  hierarchy: h.yaml\n"
        )
        code, _, err = run(capsys, "staged-fit", "--config", config, "--out", tmp_path / "o")
        assert code == 2
        assert "lambda" in json.loads(err)["message"]

    def test_heatmap_non_numeric_matrix(self, tmp_path, capsys):
        matrix = tmp_path / "K.csv"
        matrix.write_text("target,a,b\nr1,0.5,oops\n")
        code, _, err = run(capsys, "heatmap", matrix)
        record = json.loads(err)
        assert code == 3
        assert record["error"] == "DataError"
        assert not (tmp_path / "K.svg").exists()

    def test_corrupt_archive_is_data_error(self, toy_dir, tmp_path, capsys):
        """A provenance record missing stage fields is reported, not raised."""
        run(capsys, "staged-fit", "--config", toy_dir / "run.yaml", "--out", tmp_path)
        provenance = tmp_path / "provenance.json"
        record = json.loads(provenance.read_text())
        del record["stages"][0]["residual_fro"]
        provenance.write_text(json.dumps(record))
        code, _, err = run(capsys, "impact", "--config", toy_dir / "run.yaml", "--out", tmp_path)
        assert code == 3
        assert "Malformed archive" in json.loads(err)["message"]

    def test_truth_with_text_cells(self, oscillator_dir, tmp_path, capsys):
        truth = tmp_path / "truth.csv"
        truth.write_text("label,x1,v1,x2,v2\nx1,1,0,0,0\nv1,0,x,0,0\nx2,0,0,1,0\nv2,0,0,0,1\n")
        config = tmp_path / "run.yaml"
        config.write_text(
            (oscillator_dir / "run.yaml").read_text()
            .replace("truth.csv", str(truth))
            .replace("expression.csv", str(oscillator_dir / "expression.csv"))
            .replace("manifest.json", str(oscillator_dir / "manifest.json"))
        )
        code, _, err = run(capsys, "fit", "--config", config, "--out", tmp_path / "o")
        assert code == 3
        assert json.loads(err)["error"] == "DataError"
