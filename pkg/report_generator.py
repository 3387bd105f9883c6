"""
PDF Report Generator for QICC Solutions
Calculation report: scenario, solver settings, boundary values, solution
"""

from datetime import datetime

import numpy as np
from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import mm
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from config import QiccConfig
from entropy import max_sum_rate
from estimator import mse_min
from solver import InitPolicy, Solution

HEADER_STYLE = [
    ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#667eea')),
    ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
    ('ALIGN', (0, 0), (-1, -1), 'LEFT'),
    ('ALIGN', (1, 0), (-1, -1), 'RIGHT'),
    ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
    ('FONTSIZE', (0, 0), (-1, 0), 10),
    ('FONTSIZE', (0, 1), (-1, -1), 9),
    ('BOTTOMPADDING', (0, 0), (-1, -1), 6),
    ('TOPPADDING', (0, 0), (-1, -1), 6),
    ('BACKGROUND', (0, 1), (-1, -1), colors.HexColor('#f8f9fa')),
    ('GRID', (0, 0), (-1, -1), 0.5, colors.grey),
]


class SolutionReport:
    """
    Generate a PDF calculation report for one solved QICC allocation
    """

    def __init__(self, config: QiccConfig, solution: Solution, project_info=None):
        """
        Args:
            config: Parsed configuration the solution was computed from
            solution: Output of the AO solver
            project_info: Optional dictionary with 'name' and 'reference'
        """
        self.config = config
        self.solution = solution
        self.project_info = project_info or {}

    def _table(self, rows, widths):
        table = Table(rows, colWidths=[w * mm for w in widths])
        table.setStyle(TableStyle(HEADER_STYLE))
        return table

    def generate_pdf(self, filename):
        """
        Create PDF report

        Args:
            filename: Output PDF filename

        Returns:
            filename
        """
        doc = SimpleDocTemplate(
            filename,
            pagesize=A4,
            rightMargin=20*mm,
            leftMargin=20*mm,
            topMargin=20*mm,
            bottomMargin=20*mm
        )

        story = []
        styles = getSampleStyleSheet()

        title_style = ParagraphStyle(
            'CustomTitle',
            parent=styles['Heading1'],
            fontSize=20,
            textColor=colors.HexColor('#2c3e50'),
            spaceAfter=10,
            alignment=TA_CENTER
        )
        heading_style = ParagraphStyle(
            'CustomHeading',
            parent=styles['Heading2'],
            fontSize=14,
            textColor=colors.HexColor('#2c3e50'),
            spaceAfter=10,
            spaceBefore=15
        )

        sc = self.config.scenario
        sv = self.config.solver
        sol = self.solution

        story.append(Paragraph('QICC Power Allocation Report', title_style))
        story.append(Paragraph(
            f"{self.project_info.get('name', 'Bosonic MAC scenario')} - "
            f"{datetime.now().strftime('%d %B %Y')}",
            styles['Normal']
        ))
        story.append(Spacer(1, 8*mm))

        # Scenario
        story.append(Paragraph('Scenario', heading_style))
        eta_text = ', '.join(f"{e:.4g}" for e in sc.eta)
        story.append(self._table([
            ['Parameter', 'Value'],
            ['OAC devices K', str(sc.K)],
            ['Communication devices M', str(sc.M)],
            ['Transmissivities eta', eta_text],
            ['Noise N0 (photons)', f"{sc.N0:g}"],
            ['OAC power cap Pc', f"{sc.Pc:g}"],
            ['Communication power cap Pt', f"{sc.Pt:g}"],
        ], [70, 90]))

        # Solver settings
        story.append(Paragraph('Solver Settings', heading_style))
        g_init = sv.g_init.value if isinstance(sv.g_init, InitPolicy) else 'explicit'
        story.append(self._table([
            ['Setting', 'Value'],
            ['Stepsize mu', f"{sv.mu:g}"],
            ['AO tolerance', f"{sv.eps_ao:g}"],
            ['Bisection tolerance', f"{sv.eps_mse:g}"],
            ['Iteration cap', str(sv.n_max)],
            ['Initialisation', g_init],
            ['Monotone guard', 'ON' if sv.monotone_guard else 'OFF'],
        ], [70, 90]))

        # Results
        story.append(Paragraph('Results', heading_style))
        story.append(self._table([
            ['Quantity', 'Value'],
            ['Requested sum-rate (bits)', f"{sol.r_sum:.6g}"],
            ['Maximum sum-rate R_max (bits)', f"{max_sum_rate(sc):.6g}"],
            ['MSE', f"{sol.mse:.9g}"],
            ['MSE_min / MSE_max', f"{mse_min(sc):.6g} / {sc.K}"],
            ['Aggregate communication power N_sig', f"{sol.alloc.n_sig:.6g}"],
            ['Receive coefficient h', f"{float(np.real(sol.alloc.h)):.6g}"],
            ['OAC aggregate cap Gamma_max', f"{sol.gamma_max:.6g}"],
            ['Iterations', f"{sol.iterations} ({sol.trace.terminated_by.value})"],
        ], [90, 70]))

        # Per-device powers
        story.append(Paragraph('Device Powers', heading_style))
        rows = [['Device', 'Type', 'Power']]
        rows += [[f"k={k + 1}", 'OAC', f"{g:.6g}"] for k, g in enumerate(sol.alloc.g)]
        rows += [[f"m={m + 1}", 'Communication', f"{p:.6g}"] for m, p in enumerate(sol.comm_powers)]
        story.append(self._table(rows, [40, 60, 60]))

        if sol.warnings:
            story.append(Paragraph('Calculation Warnings', heading_style))
            warning_text = '<br/>'.join([f"• {w}" for w in sol.warnings])
            story.append(Paragraph(f'<font color="#856404">{warning_text}</font>', styles['Normal']))

        story.append(Paragraph('Important Notes', heading_style))
        story.append(Paragraph(
            "The alternating-optimization result is a stationary point of a non-convex "
            "problem; no global-optimality certificate is implied. The sum-rate is the "
            "bosonic MAC bound, not the rate of a specific decoder.",
            styles['Normal']
        ))

        doc.build(story)
        return filename


def generate_report(config: QiccConfig, solution: Solution, filename, project_info=None):
    """
    Convenience function to generate a PDF report

    Args:
        config: Parsed configuration
        solution: Solved allocation
        filename: Output PDF filename
        project_info: Optional project information

    Returns:
        filename
    """
    report = SolutionReport(config, solution, project_info)
    return report.generate_pdf(filename)
