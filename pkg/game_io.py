import json
import logging
import math
from pathlib import Path

import numpy as np

from config import Config
from services.errors import InvalidGameError
from services.game_core import Game, StrategySpace

logger = logging.getLogger(__name__)


# ==================== CANONICAL JSON ====================

def _format_float(x):
    x = float(x)
    if not math.isfinite(x):
        raise InvalidGameError(f"cannot serialize non-finite number {x!r}")
    if x == 0.0:
        return '0.0'
    text = format(x, f'.{Config.FLOAT_DIGITS}g')
    if 'e' not in text and '.' not in text:
        text += '.0'
    return text


def _encode(value, indent, level):
    pad = ' ' * (indent * (level + 1)) if indent else ''
    close = ' ' * (indent * level) if indent else ''
    newline = '\n' if indent else ''

    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if value is None:
        return 'null'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _format_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, dict):
        if not value:
            return '{}'
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}"
                 for k, v in value.items()]
        return '{' + newline + (',' + newline).join(items) + newline + close + '}'
    if isinstance(value, (list, tuple)):
        if not value:
            return '[]'
        # numeric rows stay on one line
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in value):
            return '[' + ', '.join(_encode(v, 0, 0) for v in value) + ']'
        items = [pad + _encode(v, indent, level + 1) for v in value]
        return '[' + newline + (',' + newline).join(items) + newline + close + ']'
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value, indent=2):
    """Deterministic JSON: insertion key order and 17 significant digits for every float"""
    return _encode(value, indent, 0)


def write_json(value, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(value) + '\n', encoding='utf-8')
    logger.info(f"✅ Wrote {path}")
    return path


# ==================== GAMES ====================

def game_to_dict(f):
    """{"players": n, "strategies": [[labels]...], "payoffs": [tensor per player]}"""
    return {
        'players': f.n,
        'strategies': [list(labels) for labels in f.space.labels],
        'payoffs': f.payoffs.tolist(),
    }


def game_from_dict(data):
    if not isinstance(data, dict):
        raise InvalidGameError("game JSON must be an object")
    for key in ('players', 'strategies', 'payoffs'):
        if key not in data:
            raise InvalidGameError(f"game JSON is missing '{key}'")

    players = data['players']
    strategies = data['strategies']
    if not isinstance(players, int) or isinstance(players, bool):
        raise InvalidGameError("'players' must be an integer", players=players)
    if not isinstance(strategies, list) or len(strategies) != players:
        raise InvalidGameError(f"'strategies' must list labels for each of the {players} players")
    if not all(isinstance(labels, list) for labels in strategies):
        raise InvalidGameError("every entry of 'strategies' must be a list of labels")

    space = StrategySpace(tuple(tuple(labels) for labels in strategies))
    try:
        payoffs = np.array(data['payoffs'], dtype=float)
    except (TypeError, ValueError) as e:
        raise InvalidGameError(f"payoffs are not a rectangular numeric array: {e}")
    return Game(space, payoffs)


def loads_game(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidGameError(f"invalid JSON: {e}")
    return game_from_dict(data)


def load_game(path):
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise InvalidGameError(f"cannot read game file {path}: {e}", path=str(path))
    game = loads_game(text)
    logger.debug(f"loaded game {game.space.sizes} from {path}")
    return game


def save_game(f, path):
    return write_json(game_to_dict(f), path)


# ==================== RESULTS ====================

def decomposition_to_dict(result):
    return {
        'scheme': result.scheme,
        'components': {name: game_to_dict(g) for name, g in result.components.items()},
        'residual': result.residual,
        'component_norms': dict(result.component_norms),
    }


def decompositions_payload(results):
    """A single result for one-part schemes, a list for the elementary scheme"""
    payload = [decomposition_to_dict(r) for r in results]
    return payload[0] if len(payload) == 1 else payload


def write_decomposition(results, out_dir):
    """decomposition.json plus one game file per component, named <scheme>_<component>.json"""
    out_dir = Path(out_dir)
    written = [write_json(decompositions_payload(results), out_dir / 'decomposition.json')]
    for result in results:
        for name, game in result.components.items():
            written.append(save_game(game, out_dir / f"{result.scheme}_{name}.json"))
    return written


def frame_to_csv(frame, path=None):
    """Grid tables with full-precision floats; returns the text when no path is given"""
    float_format = f'%.{Config.FLOAT_DIGITS}g'
    if path is None:
        return frame.to_csv(index=False, float_format=float_format, lineterminator='\n')
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=float_format, lineterminator='\n')
    logger.info(f"✅ Wrote {len(frame)} grid rows to {path}")
    return path
