"""
Report generator for dcaport.

Writes benchmark reports as aligned text, delimiter-separated values or
JSON, exports DCA traces, and prints solve summaries.
"""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from dcaport.dca.solver import DcaResult
from dcaport.dca.trace import TRACE_COLUMNS, trace_rows
from dcaport.exact.result import ExactResult
from dcaport.model.instance import Instance
from dcaport.reporting.benchmark import BenchReport
from dcaport.utils.exceptions import ReportGenerationError
from dcaport.utils.file_utils import ensure_parent_dir
from dcaport.utils.logger import get_logger

logger = get_logger()

BENCH_COLUMNS = ('card', 'dca_objective', 'dca_seconds', 'dca_iterations',
                 'exact_objective', 'exact_seconds', 'exact_status', 'gap',
                 'error')
BENCH_HEADERS = ('card', 'DCA obj', 'DCA s', 'iter', 'exact obj',
                 'exact s', 'status', 'gap', 'error')
FORMATS = ('text', 'csv', 'json')


class ReportGenerator:
    """
    Renders benchmark and solve results.

    Objective columns use ``precision`` decimals, timing columns 3.
    """

    def __init__(self, precision: int = 6, delimiter: str = ','):
        """
        Initialize report generator.

        Args:
            precision: Decimals for objective and gap columns
            delimiter: Separator for delimiter-separated output
        """
        self.precision = precision
        self.delimiter = delimiter

    def _cell(self, column: str, value: Any) -> str:
        if value is None:
            return '-'
        if isinstance(value, float):
            if math.isnan(value):
                return 'nan'
            if column.endswith('seconds'):
                return f"{value:.3f}"
            return f"{value:.{self.precision}f}"
        return str(value)

    def _cells(self, row: Dict[str, Any]) -> List[str]:
        return [self._cell(col, row.get(col)) for col in BENCH_COLUMNS]

    def format_table(self, report: BenchReport) -> str:
        """
        Render a report as an aligned text table.

        Args:
            report: Benchmark report

        Returns:
            str: Table with a header line
        """
        rows = [self._cells(r) for r in report.as_dict()['rows']]
        widths = [len(h) for h in BENCH_HEADERS]
        for cells in rows:
            widths = [max(w, len(c)) for w, c in zip(widths, cells)]
        lines = [f"# dataset {report.dataset or '-'}  n={report.n}"]
        lines.append('  '.join(h.rjust(w)
                               for h, w in zip(BENCH_HEADERS, widths)))
        for cells in rows:
            lines.append('  '.join(c.rjust(w) for c, w in zip(cells, widths)))
        return '\n'.join(lines) + '\n'

    def format_delimited(self, report: BenchReport) -> str:
        """Render a report as delimiter-separated values."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, delimiter=self.delimiter,
                            lineterminator='\n')
        writer.writerow(BENCH_COLUMNS)
        for row in report.as_dict()['rows']:
            writer.writerow(['' if c == '-' else c for c in self._cells(row)])
        return buffer.getvalue()

    def render(self, report: BenchReport, format: str = 'text') -> str:
        """
        Render a report in one of ``text``, ``csv`` or ``json``.

        Raises:
            ReportGenerationError: If the format is unknown
        """
        fmt = format.lower()
        if fmt == 'text':
            return self.format_table(report)
        if fmt == 'csv':
            return self.format_delimited(report)
        if fmt == 'json':
            return json.dumps(report.as_dict(), indent=2, default=str) + '\n'
        raise ReportGenerationError(f"Unsupported report format: {format}")

    def generate_report(self, report: BenchReport,
                        output_path: Union[str, Path],
                        format: str = 'text') -> Path:
        """
        Write a benchmark report to disk.

        Args:
            report: Benchmark report
            output_path: Path to output file
            format: Report format ('text', 'csv' or 'json')

        Returns:
            Path: Written path

        Raises:
            ReportGenerationError: If report generation fails
        """
        try:
            logger.info(f"Generating {format.upper()} report: {output_path}")
            text = self.render(report, format)
            out = ensure_parent_dir(output_path)
            out.write_text(text)
            logger.info(f"Report generated successfully: {out}")
            return out
        except ReportGenerationError:
            raise
        except Exception as e:
            logger.error(f"Report generation failed: {str(e)}")
            raise ReportGenerationError(
                f"Failed to generate report: {str(e)}"
            )

    def write_trace(self, result: DcaResult,
                    output_path: Union[str, Path],
                    delimiter: str = '\t') -> Path:
        """
        Export the DCA trace, one row per iteration.

        Raises:
            ReportGenerationError: If the file cannot be written
        """
        try:
            out = ensure_parent_dir(output_path)
            with open(out, 'w', newline='') as f:
                writer = csv.writer(f, delimiter=delimiter,
                                    lineterminator='\n')
                writer.writerow(TRACE_COLUMNS)
                for row in trace_rows(result.trace):
                    writer.writerow(
                        ['%.17g' % v if isinstance(v, float) else v
                         for v in (row[c] for c in TRACE_COLUMNS)]
                    )
            logger.info(f"Trace with {len(result.trace)} rows written: {out}")
            return out
        except OSError as e:
            raise ReportGenerationError(f"Failed to write trace: {e}")

    def solution_dict(self, inst: Instance, result: DcaResult,
                      relaxation: Optional[float] = None,
                      exact: Optional[ExactResult] = None) -> Dict[str, Any]:
        """Machine-readable view of a solve."""
        labels = inst.labels()
        data: Dict[str, Any] = {
            'n': inst.n,
            'card': inst.card,
            'iterations': result.iterations,
            'termination': result.termination.value,
            'theta': result.theta,
            'seconds': round(result.seconds, 3),
            'objective': None,
            'support': [],
            'weights': {},
        }
        if result.solution is not None:
            sol = result.solution
            data['objective'] = sol.objective
            data['support'] = [labels[j] for j in sol.support]
            data['weights'] = {labels[j]: float(sol.x[j])
                               for j in sol.support}
        if relaxation is not None:
            data['relaxation'] = relaxation
        if exact is not None:
            data['exact'] = {
                'status': exact.status.value,
                'objective': exact.objective,
                'lower_bound': exact.lower_bound,
                'seconds': round(exact.seconds, 3),
                'method': exact.method,
            }
        return data

    def print_solution(self, inst: Instance, result: DcaResult,
                       relaxation: Optional[float] = None,
                       exact: Optional[ExactResult] = None) -> None:
        """
        Print human-readable summary to console.

        Args:
            inst: Solved instance
            result: DCA result
            relaxation: Optional continuous relaxation value
            exact: Optional exact baseline
        """
        p = self.precision
        data = self.solution_dict(inst, result, relaxation, exact)
        print("\n" + "=" * 70)
        print("DCAPORT SOLUTION")
        print("=" * 70 + "\n")
        print(f"Assets: {inst.n}  card: {inst.card} ({inst.card_mode})")
        print(f"Iterations: {result.iterations} ({data['termination']}), "
              f"theta {result.theta:g}")
        print(f"Seconds: {result.seconds:.3f}")
        if result.solution is None:
            print("Objective: no feasible support found")
        else:
            print(f"Objective: {result.solution.objective:.{p}f}")
            print("\nWeights:")
            for label, weight in data['weights'].items():
                print(f"  {label}: {weight:.{p}f}")
        if relaxation is not None:
            print(f"\nRelaxation bound: {relaxation:.{p}f}")
        if exact is not None:
            print(f"Exact ({exact.method}): {exact.status.value}, "
                  f"objective {exact.objective:.{p}f}, "
                  f"{exact.seconds:.3f}s")
        print("\n" + "=" * 70 + "\n")
