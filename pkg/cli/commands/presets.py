from pathlib import Path
from typing import List, Tuple

from rich.console import Console
from rich.table import Table

from dipolesim import settings
from dipolesim.errors import ConfigError
from scenarios.config import config_from_dict, load_config_data


def shipped_presets(directory: Path = settings.PRESETS_DIR) -> List[Tuple[Path, object]]:
    """(path, ScenarioConfig or ConfigError) for every JSON file in the presets directory."""
    entries = []
    for path in sorted(Path(directory).glob("*.json")):
        try:
            entries.append((path, config_from_dict(load_config_data(path))))
        except ConfigError as e:
            entries.append((path, e))
    return entries


def list_presets(console: Console, directory: Path = settings.PRESETS_DIR) -> int:
    entries = shipped_presets(directory)
    if not entries:
        console.print(f"[yellow]No preset configs found in {directory}[/yellow]")
        return 1

    table = Table(title="Shipped scenario configs")
    table.add_column("File", style="cyan")
    table.add_column("Preset")
    table.add_column("Name")
    table.add_column("N", justify="right")
    table.add_column("Spacing", justify="right")
    for path, config in entries:
        if isinstance(config, ConfigError):
            table.add_row(path.name, "[red]invalid[/red]", config.message, "", "")
            continue
        table.add_row(path.name, config.preset, config.name or "", str(config.geometry.n_total), f"{config.geometry.d:g}")
    console.print(table)
    return 1 if any(isinstance(config, ConfigError) for _, config in entries) else 0
