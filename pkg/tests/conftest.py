import os
import stat

import pytest

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def data_dir() -> str:
    return DATA_DIR


def write_script(path, body: str = "exit 0\n"):
    path.write_text("#!/bin/sh\n" + body)
    path.chmod(path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)


def make_scripts(dirpath, level_names, log_file=None, failing=()):
    """Create <level>.to / <level>.from scripts; optionally log invocations
    (one `<name>.<ext> <from>-><to>` line per run) or make some fail."""
    dirpath.mkdir(parents=True, exist_ok=True)
    for name in level_names:
        for ext in ("to", "from"):
            label = f"{name}.{ext}"
            if log_file is not None:
                body = f'echo "{label} $RIPS_LEVEL_FROM->$RIPS_LEVEL_TO" >> "{log_file}"\n'
            else:
                body = ""
            body += "exit 1\n" if label in failing else "exit 0\n"
            write_script(dirpath / label, body)
    return str(dirpath)


@pytest.fixture
def scripts_factory(tmp_path):
    def factory(level_names, log_file=None, failing=(), subdir="scripts"):
        return make_scripts(tmp_path / subdir, level_names, log_file, failing)

    return factory
