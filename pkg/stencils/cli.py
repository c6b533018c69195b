"""
Programmatic entry point: ``cli_main(['verify', '--size', '32'])`` runs a
management command as ``manage.py`` would and returns its exit code.
"""

import sys

from django.core.management import get_commands, load_command_class

SUBCOMMANDS = ('bench', 'verify', 'model', 'dist')


def cli_main(argv=None, prog='manage.py'):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMMANDS:
        sys.stderr.write(f'usage: {prog} {{{",".join(SUBCOMMANDS)}}} [options]\n')
        return 2
    name = argv[0]
    command = load_command_class(get_commands()[name], name)
    try:
        # argparse errors exit 2, CommandError exits with its returncode
        command.run_from_argv([prog] + argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    return 0
