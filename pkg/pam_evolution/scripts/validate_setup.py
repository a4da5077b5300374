#!/usr/bin/env python3
"""
Validation script for a pam-evolution checkout.
Checks the layout, the installed dependencies and runs a tiny experiment.
"""
import importlib
import sys
import tempfile
from pathlib import Path

PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

REQUIRED_PACKAGES = ["numpy", "pydantic", "structlog", "dotenv", "aiofiles"]


def validate_project_structure():
    """Validate that all required directories and files exist."""
    required_paths = [
        "src",
        "src/dag",
        "src/symreg",
        "src/evolution",
        "src/predictor",
        "src/strategies",
        "src/training",
        "src/analysis",
        "src/tools",
        "src/workflows",
        "src/config",
        "configs/local_config.py",
        "configs/nguyen5_pam_rt.json",
        "tests",
        ".env.example",
    ]
    missing = [p for p in required_paths if not (PROJECT_ROOT / p).exists()]
    if missing:
        print("❌ Missing required paths:")
        for path in missing:
            print(f"   - {path}")
        return False
    print("✅ All required paths exist")
    return True


def validate_python_files():
    """Validate that Python files have correct syntax."""
    files = list((PROJECT_ROOT / "src").rglob("*.py"))
    errors = []
    for py_file in files:
        try:
            compile(py_file.read_text(encoding="utf-8"), str(py_file), "exec")
        except SyntaxError as e:
            errors.append((py_file, str(e)))
    if errors:
        print("❌ Python syntax errors found:")
        for file_path, error in errors:
            print(f"   - {file_path}: {error}")
        return False
    print(f"✅ All {len(files)} Python files have valid syntax")
    return True


def validate_dependencies():
    """Check that runtime dependencies import."""
    missing = []
    for name in REQUIRED_PACKAGES:
        try:
            importlib.import_module(name)
        except ImportError:
            missing.append(name)
    if missing:
        print(f"❌ Missing packages: {', '.join(missing)}")
        return False
    print("✅ Runtime dependencies are installed")
    return True


def validate_smoke_run():
    """Run a tiny noisy-oracle experiment end to end."""
    from src.config.settings import load_experiment_config
    from src.workflows.runner import run

    with tempfile.TemporaryDirectory() as tmp:
        config = load_experiment_config(overrides={
            "population_size": 10,
            "tournament_size": 3,
            "total_samples": 50,
            "predictor.mode": "noisy_oracle",
            "predictor.accuracy": 0.8,
            "out_dir": str(Path(tmp) / "smoke"),
        })
        summary = run(config)
        if not (summary.run_dir / "log.csv").exists():
            print("❌ Smoke run wrote no log")
            return False
        print(f"✅ Smoke run finished, best fitness {summary.best_fitness:.4f}")
    return True


def main():
    """Run all validation checks."""
    print("🚀 Validating pam-evolution setup...\n")

    checks = [
        ("Project Structure", validate_project_structure),
        ("Python Syntax", validate_python_files),
        ("Dependencies", validate_dependencies),
        ("Smoke Run", validate_smoke_run),
    ]

    results = []
    for name, check in checks:
        print(f"\n📋 {name}:")
        try:
            results.append((name, check()))
        except Exception as e:
            print(f"❌ {name} failed with error: {e}")
            results.append((name, False))

    print("\n" + "=" * 50)
    print("📊 VALIDATION SUMMARY")
    print("=" * 50)
    passed = sum(1 for _, ok in results if ok)
    for name, ok in results:
        print(f"{'✅ PASS' if ok else '❌ FAIL'} {name}")
    print(f"\nOverall: {passed}/{len(results)} checks passed")
    return passed == len(results)


if __name__ == "__main__":
    sys.exit(0 if main() else 1)
