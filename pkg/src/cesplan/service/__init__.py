"""HTTP service exposing the planning core: pydantic wire schemas, a
FastAPI application and payload converters."""
