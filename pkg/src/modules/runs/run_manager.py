"""
Run Manager
Directorios de ejecución: metadata con la configuración resuelta y resultados acumulados
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.config.settings import settings

logger = logging.getLogger(__name__)


class RunManager:
    """
    Manager de ejecuciones (train / eval)
    Cada ejecución tiene su directorio, su metadata JSON y un fichero de resultados
    """

    def __init__(self, runs_dir: Union[str, Path, None] = None):
        self.runs_dir = Path(runs_dir or settings.RUNS_DIR)
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        logger.debug(f"Run manager at {self.runs_dir}")

    def _metadata_file(self, run_id: str) -> Path:
        return self.runs_dir / run_id / f"{run_id}_metadata.json"

    def _results_file(self, run_id: str) -> Path:
        return self.runs_dir / run_id / f"{run_id}_results.json"

    def run_dir(self, run_id: str) -> Path:
        return self.runs_dir / run_id

    def create_run(self, command: str, config: Dict[str, Any], seed: int) -> Dict[str, Any]:
        """
        Crear una ejecución nueva

        Returns:
            Metadata de la ejecución (incluye run_id y run_dir)
        """
        stamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        run_id = f"{command}_{stamp}"
        suffix = 1
        while self.run_dir(run_id).exists():
            suffix += 1
            run_id = f"{command}_{stamp}_{suffix}"
        self.run_dir(run_id).mkdir(parents=True)

        run_data = {
            "run_id": run_id,
            "command": command,
            "seed": seed,
            "config": config,
            "created_at": datetime.now().isoformat(),
            "run_dir": str(self.run_dir(run_id)),
        }
        with open(self._metadata_file(run_id), 'w', encoding='utf-8') as f:
            json.dump(run_data, f, indent=2, ensure_ascii=False)

        logger.info(f"✅ Run created: {run_id}")
        return run_data

    def get_all_runs(self) -> List[Dict[str, Any]]:
        """Todas las ejecuciones, más recientes primero"""
        runs = []
        for metadata_file in self.runs_dir.glob("*/*_metadata.json"):
            with open(metadata_file, 'r', encoding='utf-8') as f:
                runs.append(json.load(f))
        runs.sort(key=lambda r: r['created_at'], reverse=True)
        return runs

    def get_run_metadata(self, run_id: str) -> Optional[Dict[str, Any]]:
        metadata_file = self._metadata_file(run_id)
        if not metadata_file.exists():
            return None
        with open(metadata_file, 'r', encoding='utf-8') as f:
            return json.load(f)

    def save_result(self, run_id: str, result_type: str, result: Dict[str, Any]):
        """Añadir un resultado al fichero <run_id>_results.json"""
        results_file = self._results_file(run_id)
        results: Dict[str, List[Dict[str, Any]]] = {}
        if results_file.exists():
            with open(results_file, 'r', encoding='utf-8') as f:
                results = json.load(f)

        results.setdefault(result_type, []).append({
            "timestamp": datetime.now().isoformat(),
            "result": result,
        })

        tmp = results_file.with_name(results_file.name + '.tmp')
        with open(tmp, 'w', encoding='utf-8') as f:
            json.dump(results, f, indent=2, ensure_ascii=False)
        tmp.replace(results_file)
        logger.info(f"✅ Result saved: {run_id} - {result_type}")

    def get_run_summary(self, run_id: str) -> Dict[str, Any]:
        results_file = self._results_file(run_id)
        if not results_file.exists():
            return {"success": False, "error": f"no results for run {run_id}"}

        with open(results_file, 'r', encoding='utf-8') as f:
            results = json.load(f)
        return {
            "success": True,
            "run_id": run_id,
            "result_types": list(results.keys()),
            "total_results": sum(len(items) for items in results.values()),
            "last_updated": max(item["timestamp"] for items in results.values() for item in items) if results else None,
        }
