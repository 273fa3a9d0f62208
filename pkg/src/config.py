from pydantic import BaseModel
from pydantic_settings import BaseSettings, SettingsConfigDict


class Solver(BaseModel):
    max_core_formulas: int = 200_000
    max_profile_sets: int = 200_000
    size_bound_factor: int = 16
    workers: int = 1
    canonical_permutation_cap: int = 5040


class Transform(BaseModel):
    max_rules: int = 20_000
    max_variants: int = 20_000


class Oracle(BaseModel):
    heap_bound: int = 4
    unfold_depth: int = 6
    max_structures: int = 200_000
    max_witnesses: int = 500_000


class Fuzz(BaseModel):
    problems: int = 200
    seed: int = 0
    max_predicates: int = 3
    max_width: int = 10
    constants: int = 2


class Logging(BaseModel):
    level: str = "INFO"
    file_sink: str = "sl_entail.log"
    rotation: str = "10 MB"
    compression: str = "zip"


class _Settings(BaseSettings):
    model_config = SettingsConfigDict(env_nested_delimiter="__", env_file=".env", env_prefix="SL_ENTAIL_")

    solver: Solver = Solver()
    transform: Transform = Transform()
    oracle: Oracle = Oracle()
    fuzz: Fuzz = Fuzz()
    logging: Logging = Logging()


CONFIG = _Settings()
