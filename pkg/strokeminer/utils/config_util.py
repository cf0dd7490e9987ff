import json
from pathlib import Path

from strokeminer.utils.error_util import StrokeMinerException


def load_config(config_path):
    """
    Load the JSON configuration file from the given path.

    :param config_path: The path to the configuration file.
    :type config_path: str or Path
    :return: The parsed configuration.
    :rtype: dict
    """
    try:
        with open(config_path, 'r', encoding='utf-8') as file:
            config = json.load(file)
        return config
    except FileNotFoundError as e:
        raise StrokeMinerException(f"Configuration file {config_path} not found.", subexception=e)
    except json.JSONDecodeError as e:
        raise StrokeMinerException(f"Error decoding JSON from the configuration file {config_path}.", subexception=e)


def get_default_config_path():
    """
    Get the default path to the packaged config.json file.
    """
    strokeminer_dir = Path(__file__).resolve().parents[1]
    return strokeminer_dir / 'config.json'


def config_section(config, name):
    """
    Return one section of the configuration, empty if absent.

    :param config: The parsed configuration.
    :param name: The section name.
    """
    return dict(config.get(name, {}))


"""
Load the packaged config.json file.
"""
config_path = get_default_config_path()
config = load_config(config_path)
