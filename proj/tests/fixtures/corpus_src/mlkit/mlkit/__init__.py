from .linear import LinearRegression
from .metrics import mean_squared_error, r2_score
