"""Command-line front end: classify, decompose, solve, phi grids, catalog and verify-paper"""
import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

# Ensure the project root is importable when run as a script
sys.path.insert(0, str(Path(__file__).parent.resolve()))

import game_io
from config import Config
from services import catalog
from services.classifiers import classify
from services.equilibrium import SOLVERS, phi_grid, potential_grid, solve
from services.errors import GameDecompError, InvalidSpecError
from services.reproduction import run_all
from services.subspace_engine import SCHEMES, decompose

logger = logging.getLogger(__name__)


@dataclass
class CliConfig:
    command: str
    name: str = None
    input: str = None
    game: str = None
    params: dict = field(default_factory=dict)
    scheme: str = 'main'
    method: str = 'pure'
    tol: float = None
    resolution: int = 60
    surface: str = 'phi'
    out: str = None
    seed: int = None
    list_names: bool = False

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise InvalidSpecError("--tol must be positive", tol=self.tol)
        if self.resolution < 2:
            raise InvalidSpecError("--resolution must be at least 2", resolution=self.resolution)
        if self.seed is not None:
            self.params.setdefault('seed', str(self.seed))


class _Parser(argparse.ArgumentParser):
    """Usage errors are malformed input (exit 1), not argparse's default exit 2"""

    def error(self, message):
        raise InvalidSpecError(f"{self.prog}: {message}")


def _parse_params(pairs):
    params = {}
    for pair in pairs or []:
        if '=' not in pair:
            raise InvalidSpecError(f"parameter {pair!r} is not of the form key=value")
        key, value = pair.split('=', 1)
        params[key.strip()] = value.strip()
    return params


def build_parser():
    parser = _Parser(prog='gamedecomp', description="Decompose, classify and solve finite normal-form games")
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    def add_input(p):
        source = p.add_mutually_exclusive_group(required=True)
        source.add_argument('--input', help="game JSON file")
        source.add_argument('--game', help="catalog entry name instead of a file")
        p.add_argument('--params', nargs='*', default=[], metavar='KEY=VALUE',
                       help="catalog parameters for --game")
        p.add_argument('--seed', type=int, help="seed for random catalog entries")
        p.add_argument('--tol', type=float, help="predicate tolerance (default GAMEDECOMP_TOL)")

    p = sub.add_parser('classify', help="membership flags, cycle violations and component norms")
    add_input(p)

    p = sub.add_parser('decompose', help="orthogonal decomposition")
    add_input(p)
    p.add_argument('--scheme', choices=SCHEMES, default='main')
    p.add_argument('--out', help="directory for decomposition.json and component game files")

    p = sub.add_parser('solve', help="equilibria by a named method")
    add_input(p)
    p.add_argument('--method', choices=SOLVERS, default='pure')

    p = sub.add_parser('phi', help="Phi or potential grid over symmetric profiles as CSV")
    add_input(p)
    p.add_argument('--resolution', type=int, default=60)
    p.add_argument('--surface', choices=('phi', 'potential'), default='phi')
    p.add_argument('--out', help="CSV path (stdout when absent)")

    p = sub.add_parser('catalog', help="emit a catalog game as JSON")
    p.add_argument('name', nargs='?')
    p.add_argument('--params', nargs='*', default=[], metavar='KEY=VALUE')
    p.add_argument('--seed', type=int)
    p.add_argument('--out', help="game JSON path (stdout when absent)")
    p.add_argument('--list', dest='list_names', action='store_true', help="list catalog names")

    sub.add_parser('verify-paper', help="run the reproduction suite")
    return parser


def _config_from_args(args):
    values = {k: v for k, v in vars(args).items() if v is not None}
    values['params'] = _parse_params(values.get('params'))
    return CliConfig(**values)


def _load_input(cfg):
    if cfg.input:
        return game_io.load_game(cfg.input)
    return catalog.build(cfg.game, cfg.params)


def _emit(text, out=None):
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + '\n', encoding='utf-8')
        logger.info(f"✅ Wrote {path}")
    else:
        sys.stdout.write(text + '\n')


# ==================== SUBCOMMANDS ====================

def cmd_classify(cfg):
    report = classify(_load_input(cfg), cfg.tol)
    _emit(game_io.dumps(report.to_dict()))
    return 0


def cmd_decompose(cfg):
    results = decompose(_load_input(cfg), cfg.scheme)
    if cfg.out:
        game_io.write_decomposition(results, cfg.out)
    _emit(game_io.dumps(game_io.decompositions_payload(results)))
    return 0


def cmd_solve(cfg):
    found = solve(_load_input(cfg), cfg.method, cfg.tol)
    _emit(game_io.dumps(found.to_dict()))
    return 0


def cmd_phi(cfg):
    f = _load_input(cfg)
    frame = phi_grid(f, cfg.resolution) if cfg.surface == 'phi' else potential_grid(f, cfg.resolution)
    if cfg.out:
        game_io.frame_to_csv(frame, cfg.out)
    else:
        sys.stdout.write(game_io.frame_to_csv(frame))
    return 0


def cmd_catalog(cfg):
    if cfg.list_names:
        _emit('\n'.join(sorted(catalog.CATALOG)))
        return 0
    if not cfg.name:
        raise InvalidSpecError("catalog needs a name or --list", known=sorted(catalog.CATALOG))
    game = catalog.build(cfg.name, cfg.params)
    if cfg.out:
        game_io.save_game(game, cfg.out)
    else:
        _emit(game_io.dumps(game_io.game_to_dict(game)))
    return 0


def cmd_verify_paper(cfg):
    summary = run_all()
    for row in summary.itertuples(index=False):
        marker = '✅' if row.passed else '❌'
        print(f"{marker} [{row.criterion:2d}] {row.name}: {row.detail}")
    passed = int(summary['passed'].sum())
    print(f"\n{passed}/{len(summary)} criteria passed")
    return 0 if passed == len(summary) else 1


COMMANDS = {
    'classify': cmd_classify,
    'decompose': cmd_decompose,
    'solve': cmd_solve,
    'phi': cmd_phi,
    'catalog': cmd_catalog,
    'verify-paper': cmd_verify_paper,
}


def _fail(payload, exit_code):
    logger.error(f"❌ {payload.get('error')}: {payload.get('message')}")
    sys.stderr.write(game_io.dumps(payload, indent=0) + '\n')
    return exit_code


def run(argv=None):
    """Parse ``argv`` and run one subcommand; returns the process exit code"""
    level = Config.LOG_LEVEL if isinstance(logging.getLevelName(Config.LOG_LEVEL), int) else 'INFO'
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    Config.validate_config()

    try:
        args = build_parser().parse_args(argv)
        cfg = _config_from_args(args)
        if cfg.tol is None:
            cfg.tol = Config.default_tolerance()
        return COMMANDS[cfg.command](cfg)
    except GameDecompError as e:
        return _fail(e.to_dict(), e.exit_code)
    except Exception as e:
        logger.exception("unexpected failure")
        return _fail({'error': type(e).__name__, 'message': str(e)}, 3)


if __name__ == '__main__':
    sys.exit(run())
