"""Configuration management commands for renyi-adapt."""

import click

from renyi_adapt.services.config import ConfigManager
from renyi_adapt.utils.rich_utils import print_commands, print_info, print_key_value_pairs, print_success, print_error


def _manager(ctx: click.Context) -> ConfigManager:
    root = ctx.find_root()
    config_path = root.obj.get("config_path") if isinstance(root.obj, dict) else None
    return ConfigManager(config_path)


@click.group()
def config_cli() -> None:
    """Run-default management commands."""
    pass


@config_cli.command("show")
@click.pass_context
def show_config(ctx: click.Context) -> None:
    """Show the effective run defaults and where they come from."""
    manager = _manager(ctx)
    source = str(manager.config_file) if manager.loaded_from_file else "built-in defaults"
    print_key_value_pairs(manager.config.model_dump(mode="json"), title=f"Run defaults ({source})")


@config_cli.command("init")
@click.option("--force", is_flag=True, help="Overwrite an existing config file")
@click.pass_context
def init_config(ctx: click.Context, force: bool) -> None:
    """Write the built-in run defaults to the config file."""
    manager = _manager(ctx)
    if manager.config_file.exists() and not force:
        print_info("Config file already exists", str(manager.config_file))
        print_commands([("renyi-adapt config init --force", "Overwrite it with built-in defaults")])
        return
    manager.reset()
    if manager.save_config():
        print_success("Config file written", str(manager.config_file))
    else:
        print_error("Could not write config file", str(manager.config_file))
        ctx.exit(1)
