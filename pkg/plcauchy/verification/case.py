import hashlib
import json
from typing import Any, Dict, Optional


class Case:
    """验证用例"""
    def __init__(self, case_type: str, params: Dict[str, Any] = None):
        self.case_type = case_type
        self.params = params or {}
        self.case_id = Case.make_case_id(case_type, self.params)

    @staticmethod
    def make_case_id(case_type: str, params: Dict[str, Any] = None) -> str:
        # 同样的参数得到同样的 id，报告可复现
        return f"{case_type}-{Case.format_case_params(params)[:12]}"

    @staticmethod
    def format_case_params(params: Dict[str, Any] = None) -> str:
        params = params or {}
        return hashlib.md5(json.dumps(params, sort_keys=True).encode('utf-8')).hexdigest()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case_id": self.case_id,
            "case_type": self.case_type,
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Case":
        case = cls(data["case_type"], data.get("params"))
        if data.get("case_id") and data["case_id"] != case.case_id:
            raise ValueError(f"case_id mismatch: {data['case_id']} != {case.case_id}")
        return case

    def __repr__(self):
        return f"Case(case_id={self.case_id}, case_type={self.case_type}, params={self.params})"


class CaseResult:
    """用例结果；duration 只进日志，不进报告"""
    def __init__(self, case: Case, status: str, metrics: Optional[Dict[str, Any]] = None,
                 error: Optional[str] = None, duration: float = 0.0):
        self.case = case
        self.status = status
        self.metrics = metrics or {}
        self.error = error
        self.duration = duration

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    def to_dict(self) -> Dict[str, Any]:
        data = self.case.to_dict()
        data.update({"status": self.status, "metrics": self.metrics})
        if self.error:
            data["error"] = self.error
        return data

    def __repr__(self):
        return f"CaseResult(case_id={self.case.case_id}, status={self.status})"
