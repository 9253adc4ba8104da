"""Shared base of the depthguard management commands."""

import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from .exception_handler import command_exception_handler
from .manifest import build_manifest, write_manifest

APP_LOGGERS = ("depthguard", "ingest", "depth", "scorers", "detector", "metrics", "transport", "bench", "cli")
VERBOSITY_LEVELS = {0: logging.WARNING, 1: logging.INFO, 2: logging.DEBUG, 3: logging.DEBUG}


class DepthCommand(BaseCommand):
    """A command that records a run manifest and exits 2 on anticipated errors.

    Subclasses implement ``add_command_arguments`` and ``run``. ``run`` returns
    ``(parameters, inputs, outputs)`` for the manifest.
    """

    requires_system_checks = []

    def add_arguments(self, parser):
        conf = settings.DEPTHGUARD
        parser.add_argument(
            "--threads",
            type=int,
            default=conf["THREADS"],
            help="Worker threads for modules that parallelize internally.",
        )
        parser.add_argument(
            "--output-dir",
            default=conf["OUTPUT_DIR"],
            help="Directory receiving the run manifest (env DEPTHGUARD_OUTPUT_DIR).",
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def configure_logging(self, verbosity):
        level = VERBOSITY_LEVELS.get(verbosity, logging.DEBUG)
        for name in APP_LOGGERS:
            logging.getLogger(name).setLevel(level)

    def run(self, **options):
        raise NotImplementedError("subclasses of DepthCommand must provide a run() method")

    def handle(self, *args, **options):
        self.configure_logging(options["verbosity"])
        name = self.__module__.rsplit(".", 1)[-1]
        try:
            if options["threads"] < 1:
                self.usage_error(f"--threads must be >= 1, got {options['threads']}")
            parameters, inputs, outputs = self.run(**options)
            manifest = build_manifest(name, parameters, inputs, outputs, options["threads"])
            write_manifest(manifest, options["output_dir"])
        except CommandError:
            raise
        except Exception as exc:
            raise command_exception_handler(exc, name) from exc

    def usage_error(self, message):
        raise CommandError(message, returncode=2)
