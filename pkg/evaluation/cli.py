import argparse
import asyncio
import inspect
import types
from typing import Any, Callable, Literal, Union, get_args, get_origin

from pydantic import BaseModel
from pydantic_core import PydanticUndefined


class CommandGroup:
    """Subcommands built from the Pydantic Config parameter of async/sync functions.

    Usage:
        commands = CommandGroup("geonoether", "Point symmetry analysis")

        @commands.command("lie-check")
        def lie_check(config: LieCheckConfig) -> bool:
            ...

        exit_code = commands.dispatch(argv)

    A command returns True (or None) on success and False on a failed check.
    """

    def __init__(self, prog: str, description: str | None = None):
        self.prog = prog
        self.description = description
        self.commands: dict[str, tuple[Callable, type[BaseModel]]] = {}

    def command(self, name: str) -> Callable[[Callable], Callable]:
        def register(fn: Callable) -> Callable:
            sig = inspect.signature(fn)
            config_cls = list(sig.parameters.values())[0].annotation
            self.commands[name] = (fn, config_cls)
            return fn

        return register

    def parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog=self.prog, description=self.description)
        subparsers = parser.add_subparsers(dest="command", required=True)
        for name, (fn, config_cls) in self.commands.items():
            help_text = (fn.__doc__ or "").strip().splitlines()[0] if fn.__doc__ else None
            subparser = subparsers.add_parser(name, help=help_text, description=fn.__doc__)
            add_config_arguments(subparser, config_cls)
        return parser

    def parse(self, argv: list[str] | None = None) -> tuple[Callable, BaseModel]:
        args = vars(self.parser().parse_args(argv))
        fn, config_cls = self.commands[args.pop("command")]
        return fn, config_cls.model_validate(args)

    def dispatch(self, argv: list[str] | None = None) -> bool:
        fn, config = self.parse(argv)
        if asyncio.iscoroutinefunction(fn):
            outcome = asyncio.run(fn(config))
        else:
            outcome = fn(config)
        return outcome is not False


def add_config_arguments(parser: argparse.ArgumentParser, config_cls: type[BaseModel]) -> None:
    for name, field_info in config_cls.model_fields.items():
        if field_info.default is not PydanticUndefined:
            default = field_info.default
        elif field_info.default_factory is not None:
            default = field_info.default_factory()
        else:
            default = None

        kwargs = _build_argparse_kwargs(field_info.annotation, default)
        if field_info.description:
            kwargs["help"] = field_info.description
        if field_info.is_required():
            kwargs["required"] = True
        parser.add_argument(f"--{name}", **kwargs)


def _build_argparse_kwargs(annotation, default, *, nullable: bool = False) -> dict[str, Any]:
    kwargs: dict[str, Any] = {"default": default}

    origin = get_origin(annotation)
    args = get_args(annotation)

    # Handle T | None or Optional[T]
    if origin is types.UnionType or origin is Union:
        non_none = [a for a in args if a is not type(None)]
        if len(non_none) == 1:
            return _build_argparse_kwargs(non_none[0], default, nullable=True)

    # Handle list[T] and tuple[T, ...]
    if origin in (list, tuple):
        inner_type = args[0] if args else str
        if origin is tuple and args and args[-1] is not Ellipsis:
            kwargs["nargs"] = len(args)
        else:
            kwargs["nargs"] = "*" if nullable else "+"
        kwargs["type"] = inner_type
        return kwargs

    # Handle Literal choices
    if origin is Literal:
        kwargs["choices"] = list(args)
        kwargs["type"] = type(args[0])
        return kwargs

    # Handle bool
    if annotation is bool:
        kwargs["action"] = argparse.BooleanOptionalAction
        return kwargs

    # Handle basic types
    if annotation in (str, int, float):
        kwargs["type"] = annotation
        return kwargs

    # Fallback
    kwargs["type"] = str
    return kwargs
