"""Rudimentary test for examples in docs. Will simply abort and exit with the
number of failures if any example misbehaves."""
import os, sys, glob
import argparse
import doctest
import importlib
import pathlib
import typing as t

PROJ_ROOT = pathlib.Path(__file__).parent.parent.absolute()

SkipFilter = t.Callable[[str], bool]
FLAGS = doctest.NORMALIZE_WHITESPACE | doctest.ELLIPSIS


def line_width():
    return os.get_terminal_size().columns if sys.stdout.isatty() else 79


def as_line(value: str, compensate: int = 0, filler: str = "="):
    return f"{value} ".ljust(line_width() + compensate, filler)


def NOOP(arg: str) -> bool:
    return False


def module_name(path: str) -> str:
    rel = pathlib.Path(path).with_suffix("")
    parts = list(rel.parts)
    if parts[-1] == "__init__":
        parts.pop()
    return ".".join(parts)


def test_modules(path: str, skip_cond: SkipFilter = NOOP) -> int:
    num_fails = 0
    print(f"Testing examples in {path}:")
    for fpath in sorted(glob.glob(path, recursive=True)):
        if skip_cond(fpath):
            continue
        print(as_line(str(fpath)))
        module = importlib.import_module(module_name(fpath))
        result = doctest.testmod(module, optionflags=FLAGS)
        if result.failed:
            print(as_line("\x1b[31mERROR\x1b[0m", 9))
            num_fails += result.failed
    return num_fails


def test_snippets(path: str, skip_cond: SkipFilter = NOOP) -> int:
    num_fails = 0
    print(f"Testing snippets in {path}:")
    for fpath in sorted(glob.glob(path, recursive=True)):
        if skip_cond(fpath):
            continue
        print(as_line(str(fpath)))
        result = doctest.testfile(
            os.path.abspath(fpath),
            module_relative=False,
            optionflags=FLAGS,
        )
        if result.failed:
            print(as_line("\x1b[31mERROR\x1b[0m", 9))
            num_fails += result.failed
    return num_fails


parser = argparse.ArgumentParser()
parser.add_argument(
    "--no-code",
    "-c",
    action="store_true",
    help="Disable tests for examples embedded in 'cvplan'.",
)
parser.add_argument(
    "--no-docs",
    "-d",
    action="store_true",
    help=(
        "Disable tests for interactive code snippets in docs "
        "(the ones that start with `>>>`)."
    ),
)


if __name__ == "__main__":
    os.chdir(PROJ_ROOT)
    sys.path.insert(0, str(PROJ_ROOT))

    args = parser.parse_args()
    if args.no_code and args.no_docs:
        raise ValueError("All tests were disabled by passed arguments.")

    num_fails = 0
    # embedded examples in the library
    if not args.no_code:
        num_fails += test_modules(
            os.path.join("cvplan", "**", "*.py"),
            lambda x: x.endswith("__main__.py"),
        )

    # embedded examples in the docs
    if not args.no_docs:
        num_fails += test_snippets(os.path.join("sphinx", "**", "*.rst"))

    sys.exit(num_fails)
