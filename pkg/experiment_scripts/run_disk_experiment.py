import sys
from pathlib import Path

from pydantic import ValidationError

from config.settings import EXPERIMENT_CONFIG_DIR
from experiments.config import ExperimentConfig
from experiments.metrics import write_metrics
from experiments.runner import run_experiment


def load_configs(config_dir: Path) -> list:
    """
    Parse every JSON configuration in config_dir, in file name order.

    Returns:
        List of ExperimentConfig, empty if any file is invalid
    """
    paths = sorted(config_dir.glob("*.json"))
    if not paths:
        print(f"Error: No experiment configurations found in {config_dir}")
        return []

    configs = []
    for path in paths:
        try:
            configs.append(ExperimentConfig.from_file(path))
            print(f"  ✓ Loaded {path.name}")
        except (ValidationError, ValueError) as e:
            print(f"❌ Invalid configuration {path.name}: {e}")
            return []
    return configs


if __name__ == "__main__":
    config_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else EXPERIMENT_CONFIG_DIR
    print(f"Loading experiment configurations from {config_dir}")
    configs = load_configs(config_dir)

    if not configs:
        print("\nNo valid configurations. Disk experiment aborted.")
        sys.exit(2)

    print(f"\nRunning {len(configs)} experiments...")
    try:
        for config in configs:
            result = run_experiment(config)
            print(f"  ✓ {config.name}: {len(result.rows)} rows -> {result.csv_path}")
        write_metrics(configs[0].output_dir / "metrics.prom")
        print("\nDisk experiment completed successfully!")
    except Exception as e:
        print(f"\nDisk experiment failed: {e}")
        sys.exit(1)
