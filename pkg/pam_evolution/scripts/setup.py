#!/usr/bin/env python3
"""
Prepare a pam-evolution checkout: output directories and a .env file.
"""
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from configs.local_config import get_paths  # noqa: E402


def create_directories():
    """Create the runs and logs directories."""
    paths = get_paths()
    for key in ("runs", "logs"):
        paths[key].mkdir(parents=True, exist_ok=True)
        print(f"Created directory: {paths[key]}")


def setup_environment():
    """Copy the .env template and create directories."""
    env_file = PROJECT_ROOT / ".env"
    env_example = PROJECT_ROOT / ".env.example"
    if not env_file.exists() and env_example.exists():
        env_file.write_text(env_example.read_text())
        print(f"Created .env file from template: {env_file}")

    create_directories()

    print("\nSetup completed successfully!")
    print("\nNext steps:")
    print("1. Install the package: pip install -e '.[dev]'")
    print("2. Validate: python pam_evolution/scripts/validate_setup.py")
    print("3. Run tests: python -m pytest")


if __name__ == "__main__":
    setup_environment()
