from typing import Any

from pydantic import BaseModel, ConfigDict, Field


class ErrorResponse(BaseModel):
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "error": "expected value (line 3, column 14)",
                "detail": "SceneParseError('expected value (line 3, column 14)')",
                "context": {"scene": "scenes/desk.json", "line": 3, "column": 14},
            }
        }
    )

    error: str = Field(..., description="Error message string")
    detail: str | None = Field(
        None,
        description="Optional detailed error information (exception repr)",
    )
    context: dict[str, Any] | None = Field(
        None,
        description="Optional extra context such as the scene path, field or light index",
    )
