import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence

from ..config import worker_count
from ..logger import logger
from .case import Case, CaseResult

# handler(params) -> metrics，metrics["passed"] 缺省视为通过
Handler = Callable[[Dict[str, Any]], Dict[str, Any]]


class CaseRunner:
    """按用例类型分派处理函数，线程池并行执行"""
    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers
        self.case_handlers: Dict[str, Dict[str, Any]] = {}

    def register_case(self, case_type: str, handler: Handler, result_callback=None):
        """注册用例处理函数

        Args:
            case_type: 用例类型
            handler: 处理函数，接收 params，返回指标字典
            result_callback: 用例完成后的回调，接收 (case, result)
        """
        if case_type in self.case_handlers:
            logger.warning(f"Case handler for {case_type} already registered, will be overwritten")
        self.case_handlers[case_type] = {"handler": handler, "result_callback": result_callback}
        handler_name = handler.__name__ if hasattr(handler, '__name__') else handler.__class__.__name__
        logger.debug(f"Registered case: {case_type}: {handler_name}")

    def run(self, cases: Sequence[Case]) -> Dict[str, CaseResult]:
        """结果按提交顺序、以 case_id 为键返回，与线程数无关"""
        cases = list(cases)
        seen = set()
        for case in cases:
            if case.case_id in seen:
                raise ValueError(f"Duplicate case id: {case.case_id}")
            seen.add(case.case_id)
        workers = self.max_workers if self.max_workers is not None else worker_count()
        workers = max(1, min(workers, len(cases) or 1))
        logger.info(f"Running {len(cases)} cases on {workers} threads")
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results: List[CaseResult] = list(pool.map(self._process_case, cases))
        return {r.case.case_id: r for r in results}

    def _process_case(self, case: Case) -> CaseResult:
        handler_info = self.case_handlers.get(case.case_type)
        if not handler_info:
            logger.error(f"No handler for case type: {case.case_type}")
            return CaseResult(case, "error", error=f"no handler for {case.case_type}")
        start_time = time.time()
        try:
            metrics = handler_info["handler"](case.params)
            status = "passed" if metrics.get("passed", True) else "failed"
            result = CaseResult(case, status, metrics, duration=time.time() - start_time)
            result_callback = handler_info.get("result_callback")
            if result_callback:
                result_callback(case, result)
            logger.info(f"Case completed: {case.case_id} [{status}] (duration: {result.duration:.2f}s)")
            return result
        except Exception as e:
            logger.debug(traceback.format_exc())
            logger.error(f"Case failed: {case.case_id} - {e}")
            report = getattr(e, "report", None)
            metrics = {"report": report} if report else {}
            return CaseResult(case, "error", metrics, error=f"{type(e).__name__}: {e}",
                              duration=time.time() - start_time)
