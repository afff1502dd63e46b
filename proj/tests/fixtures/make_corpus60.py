"""Generates corpus60/pages.jsonl and corpus60/expected.json.

Every formula and paragraph is built from a semantic id; two renderings of the
same id differ only in whitespace, aliases (\\dfrac, \\le) or redundant braces.
Expected counts are derived from the ids, not from the toolkit.
"""
import json
import os

LINES = [
    ("E=mc^{2}", "E = m c ^ 2"),
    ("\\frac{a}{b}", "\\dfrac{a}{b}"),
    ("\\int_{0}^{1}f(t)dt", "\\int _ 0 ^ 1 f(t) dt"),
    ("a\\leq b", "a \\le b"),
    ("x\\geq 0", "x \\ge 0"),
    ("\\sum_{i=1}^{n}i", "{\\sum}_{i=1}^{n} i"),
    ("\\sqrt{x^{2}+y^{2}}", "\\sqrt{x^2 + y^2}"),
    ("e^{i\\pi}+1=0", "e^{i \\pi} + 1 = 0"),
    ("\\alpha+\\beta", "\\alpha + \\beta"),
    ("\\lim_{n\\to\\infty}a_{n}", "\\lim_{n \\to \\infty} a_n"),
    ("\\begin{pmatrix}a&b\\\\c&d\\end{pmatrix}", "\\begin{pmatrix} a & b \\\\ c & d \\end{pmatrix}"),
    ("f'(x)=\\tfrac{1}{x}", "f'(x) = \\frac{1}{x}"),
    ("\\nabla\\cdot E=\\rho", "\\nabla \\cdot E = \\rho"),
    ("P(A|B)", "P ( A | B )"),
    ("\\binom{n}{k}", "\\binom {n} {k}"),
    ("\\log_{2}n", "\\log_2 n"),
    ("x_{1}+x_{2}", "x_1+x_2"),
    ("\\hat{\\theta}", "\\hat {\\theta}"),
    ("\\vec{v}\\times\\vec{w}", "\\vec{v} \\times \\vec{w}"),
    ("\\det(A)\\neq 0", "\\det(A) \\neq 0"),
    ("\\mathbb{R}^{n}", "\\mathbb{R}^n"),
    ("\\partial_{t}u=\\Delta u", "\\partial_t u = \\Delta u"),
    ("a^{2}+b^{2}=c^{2}", "a^2+b^2=c^2"),
    ("\\cos^{2}x+\\sin^{2}x=1", "\\cos^2 x + \\sin^2 x = 1"),
    ("\\prod_{k}p_{k}", "\\prod_k p_k"),
    ("\\oint_{C}F\\cdot dr", "\\oint_C F \\cdot dr"),
    ("\\max_{x}g(x)", "\\max_x g(x)"),
    ("|x-y|<\\epsilon", "|x - y| < \\epsilon"),
    ("\\exp(-x^{2})", "\\exp(-x^2)"),
    ("n!\\approx\\sqrt{2\\pi n}", "n! \\approx \\sqrt{2 \\pi n}"),
]

SHARED_PARAGRAPHS = [
    ("Consider $a_{%d}$ when the index is large." % k,
     ("Consider  $a_%d$ when the index is large." if k < 10 else "Consider  $a_{ %d }$ when the index is large.") % k)
    for k in range(20)
]


def page(i):
    line_id = i % 30
    line = LINES[line_id][i // 30]
    shared_id = i % 20
    shared = SHARED_PARAGRAPHS[shared_id][(i // 20) % 2]
    own = "Page %d notes $y_{%d}$ for later." % (i, i)
    html = i % 2 == 0
    if html:
        body = "<h1>Note %d</h1>\n<p>%s</p>\n<p>$$%s$$</p>\n<p>%s</p>\n" % (
            i, shared.replace("&", "&amp;"), line.replace("&", "&amp;"), own)
    else:
        body = "# Note %d\n\n%s\n\n$$%s$$\n\n%s\n" % (i, shared, line, own)
    # pages 55..59 repeat the bodies of pages 0..4 under new ids
    return body, ("html" if html else "markdown"), {
        "line": "L%d" % line_id,
        "paragraphs": ["S%d" % shared_id, "O%d" % i],
        "page": "P%d" % i,
    }


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    out_dir = os.path.join(here, "corpus60")
    os.makedirs(out_dir, exist_ok=True)
    pages, ids = [], []
    for i in range(60):
        if i >= 55:
            body, fmt, sem = page(i - 55)
        else:
            body, fmt, sem = page(i)
        pages.append({"page_id": "p%02d" % i, "url": "https://example.org/q/%d" % i, "format": fmt, "body": body})
        ids.append(sem)
    with open(os.path.join(out_dir, "pages.jsonl"), "w") as f:
        for p in pages:
            f.write(json.dumps(p, ensure_ascii=False) + "\n")

    def counts(values):
        return {"before": len(values), "kept": len(set(values)), "dropped": len(values) - len(set(values))}

    expected = {
        "line": counts([s["line"] for s in ids]),
        "paragraph": counts([p for s in ids for p in s["paragraphs"]]),
        "page": counts([s["page"] for s in ids]),
    }
    with open(os.path.join(out_dir, "expected.json"), "w") as f:
        json.dump(expected, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
