import json
from typing import Any

from lcnf_fpm.api.requests import GradcheckRequest
from lcnf_fpm.core.exceptions import NumericalError
from lcnf_fpm.io import ManifestWriter
from lcnf_fpm.nn import run_gradchecks


def run_gradcheck(request: GradcheckRequest, writer: ManifestWriter) -> dict[str, Any]:
    """
    Finite-difference check of every layer; raises NumericalError when one fails.
    """
    results = run_gradchecks(seed=request.seed, configs=request.configs)
    summary: dict[str, float] = {}
    for result in results:
        summary[result.layer] = max(summary.get(result.layer, 0.0), result.max_relative_error)
    path = writer.out_dir / "gradcheck.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    writer.add_artifact(path, "gradcheck")
    failed = sorted({result.layer for result in results if not result.passed})
    if failed:
        raise NumericalError(f"gradient check failed for {', '.join(failed)}", {"worst": summary})
    return {"layers": summary, "passed": True}
