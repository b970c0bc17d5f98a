# services/report.py
from datetime import datetime
import os
from typing import Any, Dict, Optional
from xml.sax.saxutils import escape

from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from app.config import BLOWUP_OUTPUT_DIR

from .common import get_logger

logger = get_logger(__name__)

_SUMMARY_FIELDS = (
    ("status", "Status"),
    ("failed_stage", "Etapa com falha"),
    ("classification", "Equilíbrio"),
    ("eps", "ε (nível de subnível)"),
    ("domain_radius", "Raio do domínio"),
    ("tau_N", "τ_N"),
    ("t_N", "t_N"),
    ("tail", "Cauda"),
    ("t_max", "t_max"),
    ("steps", "Passos aceitos"),
    ("wall_time", "Tempo de parede (s)"),
)


def _text(value: Any) -> str:
    if value is None:
        return "—"
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, str) for v in value):
        return f"[{value[0]}, {value[1]}]"
    if isinstance(value, list):
        return "<br/>".join(_text(v) for v in value)
    return escape(str(value))


def createCertificatePdf(document: Dict[str, Any], outPath: Optional[str] = None) -> str:
    """Render a certificate document as a PDF report and return its path."""

    if outPath is None:
        os.makedirs(BLOWUP_OUTPUT_DIR, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        outPath = os.path.join(BLOWUP_OUTPUT_DIR, f"certificate_{timestamp}.pdf")
    else:
        os.makedirs(os.path.dirname(os.path.abspath(outPath)), exist_ok=True)

    doc = SimpleDocTemplate(outPath, pagesize=letter, leftMargin=36,
                            rightMargin=36, topMargin=36, bottomMargin=36)
    styles = getSampleStyleSheet()
    body = []

    titleStyle = ParagraphStyle(
        "title", parent=styles["Heading1"], alignment=1, spaceAfter=12)
    metaStyle = ParagraphStyle(
        "meta", parent=styles["Normal"], fontSize=10, textColor="#555555", spaceAfter=6)
    cellStyle = ParagraphStyle(
        "cell", parent=styles["Normal"], fontSize=9, leading=11)

    problem = document.get("problem") or {}
    body.append(Paragraph("Certificado de explosão em tempo finito", titleStyle))
    body.append(Paragraph(
        f"Gerado em: {datetime.now().strftime('%d/%m/%Y %H:%M:%S')}", metaStyle))
    body.append(Paragraph(
        f"Problema: <b>{problem.get('id', '?')}</b> &nbsp; Carta: <b>{document.get('chart', '?')}</b>", metaStyle))
    params = problem.get("parameters") or {}
    if params:
        listing = ", ".join(f"{escape(str(k))}={_text(v)}" for k, v in params.items())
        body.append(Paragraph(f"Parâmetros: {listing}", metaStyle))
    body.append(Spacer(1, 0.2 * inch))

    rows = [[Paragraph(f"<b>{label}</b>", cellStyle), Paragraph(_text(document.get(key)), cellStyle)]
            for key, label in _SUMMARY_FIELDS]
    table = Table(rows, colWidths=[1.8 * inch, 5.2 * inch])
    table.setStyle(TableStyle([
        ("GRID", (0, 0), (-1, -1), 0.25, "#999999"),
        ("VALIGN", (0, 0), (-1, -1), "TOP"),
    ]))
    body.append(table)

    if document.get("x_star"):
        body.append(Spacer(1, 0.2 * inch))
        body.append(Paragraph("<b>Equilíbrio validado x*:</b>", styles["Heading3"]))
        body.append(Paragraph(_text(document["x_star"]), cellStyle))
    if document.get("message"):
        body.append(Spacer(1, 0.2 * inch))
        body.append(Paragraph(f"<b>Mensagem:</b> {escape(document['message'])}", styles["Normal"]))

    doc.build(body)
    logger.info("relatório salvo em %s", outPath)
    return outPath
