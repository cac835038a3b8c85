"""
Command-line entry point: builds states, runs the conversion optimizations and
sweeps, and writes their results as CSV and JSON files.
"""

import argparse
import io
import json
import sys

import numpy as np

from triangulum import log
from triangulum.channels import DetMode, channel_output_wigner, optimize_deterministic
from triangulum.circuit import CircuitParams, ConversionCircuit, DEFAULT_FREE, optimize_probabilistic
from triangulum.config import RunConfig, defaults
from triangulum.env import KvPair, Seed
from triangulum.error import InvalidArgument, Status, TriangulumError
from triangulum.fock import build_kerr_trisqueezed, build_trisqueezed, db_to_xi
from triangulum.optim import EvolutionConfig, SwarmConfig
from triangulum.phase import (
    WignerGrid,
    cubic_phase_mana,
    default_axis,
    find_matching_cubicity,
    mana,
    widening,
    wigner_grid,
    wigner_wavefunctions,
)
from triangulum.report import Bundle, CsvTable, JsonReport, ReportFile
from triangulum.sweep import (
    delta_sweep,
    eta_sweep,
    gate_error_delta_sweep,
    gate_error_sweep,
    kerr_input_fidelity,
    kerr_sweep,
    mana_sweep,
    param_sweep,
)
from triangulum.teleport import gate_error
from triangulum.wavefunction import cubic_phase_wavefunction, displaced_squeezed_wavefunction, gkp_plus_momentum

# flags that steer a run without changing its results
_SESSION_FLAGS = ('seed', 'threads', 'output', 'progress', 'quiet')


def _values(s: str) -> list:
    """
    Parses `A,B,C` or `LO:HI:COUNT` into a list of floats.
    """
    try:
        if ':' in s:
            words = s.split(':')
            if len(words) != 3:
                raise ValueError('a range must be written as LO:HI:COUNT')
            return [float(v) for v in np.linspace(float(words[0]), float(words[1]), int(words[2]))]
        return [float(v) for v in s.split(',') if len(v.strip()) > 0]
    except ValueError as e:
        raise argparse.ArgumentTypeError('invalid value list "'+s+'": '+str(e))


def _names(s: str) -> list:
    return [w.strip() for w in s.split(',') if len(w.strip()) > 0]


def _float_pairs(pairs) -> dict:
    if isinstance(pairs, dict):
        return pairs
    try:
        return {p.key: p.as_float() for p in pairs}
    except ValueError as e:
        raise InvalidArgument(str(e))


def _range_pairs(pairs) -> dict:
    if isinstance(pairs, dict):
        return pairs
    try:
        return {p.key: list(p.as_range()) for p in pairs}
    except ValueError as e:
        raise InvalidArgument(str(e))


class Command:
    """
    A subcommand: parses its flags into a replayable RunConfig, computes its
    results and writes them only once everything succeeded.
    """
    NAME = None
    OPTIMIZES = False

    def __init__(self, cfg: RunConfig, progress: str=None):
        self.cfg = cfg
        self.progress_path = progress
        values = vars(self.parser().parse_args([]))
        for key in _SESSION_FLAGS:
            values.pop(key, None)
        unknown = set(cfg.params.keys()) - set(values.keys())
        if len(unknown) > 0:
            raise InvalidArgument('unknown '+self.NAME+' parameters: '+', '.join(sorted(unknown)))
        values.update(cfg.params)
        self.args = argparse.Namespace(**self.normalize(values))

    @classmethod
    def parser(cls) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser('triangulum '+cls.NAME, allow_abbrev=False)
        parser.add_argument('--seed', type=Seed.from_arg, default=None, metavar='N', help='random seed (drawn at random if omitted)')
        parser.add_argument('--threads', type=int, default=1, metavar='N', help='evaluate the optimizer population on N threads')
        parser.add_argument('--output', '-o', default=None, metavar='STEM', help='path stem for the output files')
        parser.add_argument('--progress', default=None, metavar='PATH', help='write optimizer progress as line-delimited JSON')
        parser.add_argument('--quiet', '-q', action='store_true', help='silence informational messages')
        if cls.OPTIMIZES:
            parser.add_argument('--method', choices=['pso', 'de'], default='pso', help='particle swarm or differential evolution')
            parser.add_argument('--particles', type=int, default=None, metavar='N', help='swarm size or population')
            parser.add_argument('--iterations', type=int, default=None, metavar='N', help='number of optimizer iterations')
        cls.add_arguments(parser)
        return parser

    @staticmethod
    def add_arguments(parser: argparse.ArgumentParser):
        pass

    @staticmethod
    def normalize(params: dict) -> dict:
        return params

    @classmethod
    def from_args(cls, args: list):
        ns = cls.parser().parse_args(args)
        log.set_quiet(ns.quiet)
        params = {k: v for (k, v) in vars(ns).items() if k not in _SESSION_FLAGS}
        seed = ns.seed if ns.seed is not None else Seed()
        cfg = RunConfig(
            command=cls.NAME,
            params=cls.normalize(params),
            seed=seed.get_seed(),
            threads=ns.threads,
            output=ns.output if ns.output is not None else cls.NAME,
        )
        return cls(cfg, ns.progress)

    def optimizer(self):
        a = self.args
        if a.method == 'de':
            return EvolutionConfig.from_defaults(population=a.particles, n_iter=a.iterations, seed=self.cfg.seed, threads=self.cfg.threads)
        return SwarmConfig.from_defaults(n_particles=a.particles, n_iter=a.iterations, seed=self.cfg.seed, threads=self.cfg.threads)

    def compute(self, bundle: Bundle, progress):
        raise NotImplementedError

    def path(self, suffix: str) -> str:
        return self.cfg.output + suffix

    def run(self):
        bundle = Bundle()
        progress = log.Progress(path=self.progress_path) if self.progress_path is not None else None
        try:
            self.compute(bundle, progress)
        finally:
            if progress is not None:
                progress.close()
        bundle.add(JsonReport(self.path('.config.json'), json.loads(self.cfg.to_json())))
        bundle.save()
        for p in bundle.get_paths():
            log.info('wrote', p)


def _add_target(parser: argparse.ArgumentParser):
    parser.add_argument('--t', type=float, default=0.1, help='triplicity of the trisqueezed input')
    parser.add_argument('--r', type=float, default=None, help='target cubicity (mana-matched to --t if omitted)')
    parser.add_argument('--sq-db', type=float, default=None, metavar='DB', help='target squeezing in dB')
    parser.add_argument('--cutoff', type=int, default=None, help='Fock cutoff of the input state')


def _target(args) -> tuple:
    db = args.sq_db if args.sq_db is not None else defaults().get_float('target.squeezing_db')
    xi = db_to_xi(db)
    r = args.r
    if r is None:
        r = find_matching_cubicity(args.t, xi, args.cutoff)
        log.info('matched cubicity', format(r, '.6f'), 'to triplicity', args.t)
    return (r, xi)


def _add_circuit(parser: argparse.ArgumentParser):
    parser.add_argument('--param', action='append', type=KvPair.from_arg, default=[], metavar='KEY=VALUE', help='set a circuit parameter')
    parser.add_argument('--params-file', default=None, metavar='PATH', help='start from the circuit parameters of a prob-opt result')
    parser.add_argument('--free', type=_names, default=list(DEFAULT_FREE), metavar='NAMES', help='comma-separated parameters to optimize')
    parser.add_argument('--free-gamma', action='store_true', help='also optimize the ancilla rotation')
    parser.add_argument('--bound', action='append', type=KvPair.from_arg, default=[], metavar='KEY=LO:HI', help='narrow the search range of a parameter')
    parser.add_argument('--no-rotate', action='store_true', help='feed the input without the quarter-turn of its triplicity')
    parser.add_argument('--kerr-ratio', type=float, default=None, metavar='T/K', help='deform the input by a Kerr term with this ratio')


def _normalize_circuit(params: dict) -> dict:
    params['param'] = _float_pairs(params['param'])
    params['bound'] = _range_pairs(params['bound'])
    return params


def _base_params(args) -> CircuitParams:
    values = CircuitParams.from_defaults().to_dict()
    if args.params_file is not None:
        with open(args.params_file, 'r') as fd:
            data = json.load(fd)
        values.update(data.get('extra', {}).get('params', {}))
    values.update(args.param)
    return CircuitParams.from_dict(values)


def _free(args) -> list:
    free = list(args.free)
    if args.free_gamma and 'gamma' not in free:
        free.append('gamma')
    return free


def _circuit(args, r: float, xi: float) -> ConversionCircuit:
    rotate = not args.no_rotate
    if args.kerr_ratio is not None:
        if not args.kerr_ratio > 0.0:
            raise InvalidArgument('--kerr-ratio must be positive')
        return ConversionCircuit.from_kerr(args.t, args.t / args.kerr_ratio, 1.0, r, xi, rotate=rotate, cutoff=args.cutoff)
    return ConversionCircuit.from_triplicity(args.t, r, xi, rotate=rotate, cutoff=args.cutoff)


def _grid_report(path: str, grid: WignerGrid) -> ReportFile:
    stream = io.StringIO()
    grid.to_csv(stream)
    report = ReportFile(path)
    report.push(stream.getvalue(), end='')
    return report


class StateCommand(Command):
    """
    Wigner function and mana of one of the states the protocols work with.
    """
    NAME = 'state'
    KINDS = ['trisqueezed', 'cubic', 'squeezed', 'kerr-trisqueezed', 'gkp']

    @staticmethod
    def add_arguments(parser):
        parser.add_argument('--kind', choices=StateCommand.KINDS, default='trisqueezed', help='which state to build')
        _add_target(parser)
        parser.add_argument('--xi', type=float, default=0.0, help='squeezing of the displaced squeezed state')
        parser.add_argument('--beta-q', type=float, default=0.0, help='real part of the displacement')
        parser.add_argument('--beta-p', type=float, default=0.0, help='imaginary part of the displacement')
        parser.add_argument('--kerr', type=float, default=0.0, help='Kerr rate of the kerr-trisqueezed state')
        parser.add_argument('--tau', type=float, default=1.0, help='interaction time of the kerr-trisqueezed state')
        parser.add_argument('--gkp-delta', type=float, default=None, help='peak width of the GKP state')
        parser.add_argument('--halfwidth', type=float, default=None, help='fixed half-width of the Wigner grid')
        parser.add_argument('--spacing', type=float, default=None, help='grid spacing (with --halfwidth)')
        parser.add_argument('--wigner-method', choices=['laguerre', 'fourier'], default='laguerre', help='Wigner construction for Fock states')

    def _grid(self, compute) -> WignerGrid:
        a = self.args
        if a.halfwidth is None:
            return widening(compute, fallback=True)
        return compute(default_axis(a.halfwidth, a.spacing))

    def compute(self, bundle, progress):
        a = self.args
        summary = {'kind': a.kind}
        if a.kind == 'trisqueezed':
            state = build_trisqueezed(a.t, a.cutoff)
            grid = self._grid(lambda ax: wigner_grid(state, ax, ax, method=a.wigner_method))
        elif a.kind == 'kerr-trisqueezed':
            state = build_kerr_trisqueezed(a.t, a.kerr, a.tau, a.cutoff)
            grid = self._grid(lambda ax: wigner_grid(state, ax, ax, method=a.wigner_method))
            summary['input_fidelity'] = kerr_input_fidelity(a.t, a.kerr, a.tau, a.cutoff)
        elif a.kind == 'cubic':
            r, xi = _target(a)
            psi = cubic_phase_wavefunction(r, xi)
            grid = self._grid(lambda ax: wigner_wavefunctions([psi], [1.0], ax, ax))
            summary.update({'r': r, 'xi_target': xi, 'mana_exact': cubic_phase_mana(r, xi)})
        elif a.kind == 'squeezed':
            psi = displaced_squeezed_wavefunction(a.xi, complex(a.beta_q, a.beta_p))
            grid = self._grid(lambda ax: wigner_wavefunctions([psi], [1.0], ax, ax))
        else:
            delta = a.gkp_delta if a.gkp_delta is not None else defaults().get_float('gkp.delta')
            phi = gkp_plus_momentum(delta)
            axis = default_axis(a.halfwidth if a.halfwidth is not None else defaults().get_float('gkp.halfwidth'), a.spacing)
            # the momentum wavefunction yields the grid with q and p swapped
            swapped = wigner_wavefunctions([phi], [1.0], axis, -axis, check=False)
            grid = WignerGrid(axis, axis, swapped.values.T)
            if grid.boundary_max() > defaults().get_float('wigner.boundary_tolerance'):
                log.warn('the GKP Wigner function is cut off by the grid; its mana is a lower bound')
            summary['gkp_delta'] = delta
        summary.update({
            'mana': grid.mana(),
            'mana_clamped': grid.mana(clamp=True),
            'integral': grid.integral(),
            'min': grid.min(),
            'halfwidth': float(grid.q_axis[-1]),
        })
        log.info('mana', format(summary['mana'], '.6f'))
        bundle.add(_grid_report(self.path('.wigner.csv'), grid))
        bundle.add(JsonReport(self.path('.json'), summary))


class DetOptCommand(Command):
    """
    Best Gaussian channel from a trisqueezed input to a cubic phase target.
    """
    NAME = 'det-opt'
    OPTIMIZES = True

    @staticmethod
    def add_arguments(parser):
        _add_target(parser)
        parser.add_argument('--mode', choices=DetMode.choices(), default='squeeze-displace', help='channel family to search')
        parser.add_argument('--with-mana', action='store_true', help='also report the mana of the output state')

    def compute(self, bundle, progress):
        a = self.args
        r, xi = _target(a)
        mode = DetMode.from_arg(a.mode)
        result = optimize_deterministic(a.t, r, xi, mode, self.optimizer(), progress, a.cutoff)
        log.info('fidelity', format(result.best_value, '.6f'))
        if a.with_mana:
            state = build_trisqueezed(a.t, a.cutoff)
            ch = mode.channel(result.best_x)
            result.extra['mana_out'] = widening(lambda ax: channel_output_wigner(state, ch, ax, ax), fallback=True).mana()
        bundle.add(JsonReport(self.path('.json'), result.to_dict()))


class ProbOptCommand(Command):
    """
    Best circuit parameters of the probabilistic conversion.
    """
    NAME = 'prob-opt'
    OPTIMIZES = True

    @staticmethod
    def add_arguments(parser):
        _add_target(parser)
        _add_circuit(parser)
        parser.add_argument('--with-mana', action='store_true', help='also report input and output mana')
        parser.add_argument('--gate-delta', type=float, default=None, metavar='DELTA', help='also report the gate error on a GKP input of this peak width')

    @staticmethod
    def normalize(params):
        return _normalize_circuit(params)

    def compute(self, bundle, progress):
        a = self.args
        r, xi = _target(a)
        circuit = _circuit(a, r, xi)
        result = optimize_probabilistic(circuit, self.optimizer(), _free(a), _base_params(a), progress, a.bound)
        best = CircuitParams.from_dict(result.extra['params'])
        log.info('fidelity', format(result.extra['fidelity'], '.6f'), 'probability', format(result.extra['probability'], '.6f'))
        if a.with_mana:
            result.extra['mana_in'] = mana(circuit.input_state)
            result.extra['mana_out'] = circuit.output_conditional_state(best)[1]
        if a.gate_delta is not None:
            result.extra['gate_error'] = gate_error(circuit.conditional_state(best), r, xi, a.gate_delta)
        bundle.add(JsonReport(self.path('.json'), result.to_dict()))


_SWEEP_DEFAULTS = {
    'delta': [0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5],
    'eta': [1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7],
    'mana': [0.05, 0.075, 0.1, 0.125, 0.15],
    'kerr': [1.0, 2.0, 5.0, 10.0, 20.0],
}


class SweepCommand(Command):
    """
    One-parameter sweeps of the probabilistic protocol.
    """
    NAME = 'sweep'
    OPTIMIZES = True

    @staticmethod
    def add_arguments(parser):
        parser.add_argument('--kind', choices=['delta', 'eta', 'mana', 'kerr', 'param'], default='delta', help='what to sweep')
        parser.add_argument('--values', type=_values, default=None, metavar='LIST', help='A,B,C or LO:HI:COUNT')
        parser.add_argument('--name', default=None, help='circuit parameter swept by --kind param')
        parser.add_argument('--with-mana', action='store_true', help='also report the output mana (delta and eta sweeps)')
        _add_target(parser)
        _add_circuit(parser)

    @staticmethod
    def normalize(params):
        return _normalize_circuit(params)

    def compute(self, bundle, progress):
        a = self.args
        values = a.values if a.values is not None else _SWEEP_DEFAULTS.get(a.kind)
        if values is None:
            raise InvalidArgument('--kind param needs --values')
        r, xi = _target(a)
        base = _base_params(a)
        if a.kind == 'mana':
            table = mana_sweep(values, r, xi, self.optimizer(), base, _free(a), a.cutoff)
        elif a.kind == 'kerr':
            free = _free(a)
            if 'gamma' not in free:
                free.append('gamma')
            table = kerr_sweep(a.t, values, r, xi, self.optimizer(), base, tuple(free), a.cutoff)
        else:
            circuit = _circuit(a, r, xi)
            if a.kind == 'delta':
                table = delta_sweep(circuit, base, values, a.with_mana)
            elif a.kind == 'eta':
                table = eta_sweep(circuit, base, values, a.with_mana)
            else:
                if a.name is None:
                    raise InvalidArgument('--kind param needs --name')
                table = param_sweep(circuit, base, a.name, values)
        notes = ['t = '+repr(a.t), 'r = '+repr(r), 'xi_target = '+repr(xi)]
        bundle.add(table.to_csv(self.path('.csv'), notes))


class GateErrorCommand(Command):
    """
    Gate error of the teleported cubic phase gate on a GKP |+> input.
    """
    NAME = 'gate-error'
    OPTIMIZES = True

    @staticmethod
    def add_arguments(parser):
        parser.add_argument('--kind', choices=['kerr', 'delta'], default='kerr', help='sweep t/K or the GKP peak width')
        parser.add_argument('--values', type=_values, default=None, metavar='LIST', help='A,B,C or LO:HI:COUNT')
        parser.add_argument('--gkp-delta', type=float, default=None, help='GKP peak width for --kind kerr')
        _add_target(parser)
        _add_circuit(parser)

    @staticmethod
    def normalize(params):
        return _normalize_circuit(params)

    def compute(self, bundle, progress):
        a = self.args
        r, xi = _target(a)
        base = _base_params(a)
        if a.kind == 'kerr':
            values = a.values if a.values is not None else _SWEEP_DEFAULTS['kerr']
            free = _free(a)
            if 'gamma' not in free:
                free.append('gamma')
            table = gate_error_sweep(a.t, values, r, xi, self.optimizer(), a.gkp_delta, base, tuple(free), a.cutoff)
        else:
            values = a.values if a.values is not None else [0.1, 0.15, 0.2, 0.25, 0.3]
            table = gate_error_delta_sweep(_circuit(a, r, xi), base, values)
        notes = ['t = '+repr(a.t), 'r = '+repr(r), 'xi_target = '+repr(xi)]
        bundle.add(table.to_csv(self.path('.csv'), notes))


class ManaCommand(Command):
    """
    Mana of trisqueezed states and the cubicity of the matching cubic phase state.
    """
    NAME = 'mana'

    @staticmethod
    def add_arguments(parser):
        parser.add_argument('--values', type=_values, default=[0.1, 0.125, 0.15], metavar='LIST', help='triplicities')
        parser.add_argument('--sq-db', type=float, default=None, metavar='DB', help='target squeezing in dB')
        parser.add_argument('--cutoff', type=int, default=None, help='Fock cutoff of the input state')

    def compute(self, bundle, progress):
        a = self.args
        db = a.sq_db if a.sq_db is not None else defaults().get_float('target.squeezing_db')
        xi = db_to_xi(db)
        table = CsvTable(self.path('.csv'), ['t', 'mana', 'r'], ['squeezing_db = '+repr(db)])
        for t in a.values:
            m = mana(build_trisqueezed(t, a.cutoff))
            r = find_matching_cubicity(t, xi, a.cutoff)
            log.info('t =', t, 'mana', format(m, '.4f'), 'r', format(r, '.4f'))
            table.add_row([t, m, r])
        bundle.add(table)


COMMANDS = {c.NAME: c for c in (StateCommand, DetOptCommand, ProbOptCommand, SweepCommand, GateErrorCommand, ManaCommand)}


class Triangulum:

    def __init__(self, command: Command):
        self.command = command

    @staticmethod
    def from_args(args: list):
        if len(args) > 0 and args[0] in COMMANDS:
            return Triangulum(COMMANDS[args[0]].from_args(args[1:]))
        parser = argparse.ArgumentParser('triangulum', allow_abbrev=False, description='commands: '+', '.join(COMMANDS.keys()))
        parser.add_argument('--config', required=True, metavar='PATH', help='replay a run configuration written by an earlier command')
        parser.add_argument('--progress', default=None, metavar='PATH', help='write optimizer progress as line-delimited JSON')
        parser.add_argument('--quiet', '-q', action='store_true', help='silence informational messages')
        ns = parser.parse_args(args)
        log.set_quiet(ns.quiet)
        cfg = RunConfig.load(ns.config)
        if cfg.command not in COMMANDS:
            raise InvalidArgument('unknown command "'+str(cfg.command)+'" in '+ns.config)
        if cfg.output is None:
            cfg.output = cfg.command
        return Triangulum(COMMANDS[cfg.command](cfg, ns.progress))

    def run(self):
        self.command.run()


def main():
    try:
        Triangulum.from_args(sys.argv[1:]).run()
    except InvalidArgument as e:
        log.error(e, code=Status.USAGE)
    except TriangulumError as e:
        log.error(e, code=e.status)
    except OSError as e:
        log.error(e, code=Status.USAGE)


if __name__ == "__main__":
    main()
