import functools
import inspect
from typing import Callable, List

import typer
from typer.models import ParameterInfo

__all__ = ["unwrap_typer_param", "split_list"]


def unwrap_typer_param(f: Callable):
    """
    Let a typer command also be called as an ordinary function.

    Parameters left out of a direct call receive the plain value wrapped by their
    typer.Argument / typer.Option default. Typer itself still sees the original
    signature through ``__wrapped__``, so help texts and flag names survive.
    See: https://github.com/tiangolo/typer/issues/279
    """
    signature = inspect.signature(f)
    plain_defaults = {}
    for name, parameter in signature.parameters.items():
        if parameter.default is inspect.Parameter.empty:
            continue
        default = parameter.default
        plain_defaults[name] = default.default if isinstance(default, ParameterInfo) else default

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        bound = signature.bind_partial(*args, **kwargs)
        for name, value in plain_defaults.items():
            if name in bound.arguments:
                continue
            if value is ...:
                raise TypeError(f"{f.__name__}() missing required argument: '{name}'")
            bound.arguments[name] = value
        return f(*bound.args, **bound.kwargs)

    return wrapper


def split_list(value: str, convert: Callable = str) -> List:
    """
    Parse a comma separated option value, e.g. "expert,novice" or "1,4,9".
    """
    items = [item.strip() for item in value.split(",") if item.strip()]
    try:
        return [convert(item) for item in items]
    except (KeyError, ValueError) as e:
        raise typer.BadParameter(f"cannot parse {value!r}: {e}")
