from typing import Literal

LogLevels = Literal["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"]

ModelName = Literal["uniform-set", "bernoulli-prime", "sequence-double-prime", "proper"]
PolicyName = Literal["natural", "random", "max-bias"]
StopRuleName = Literal["fixed-omega", "fixed-point"]
ProbeKind = Literal["bias", "q", "hypothesis"]
Verdict = Literal["pass", "fail", "proved <=", "proved >", "inconclusive"]
