"""Monthly commodity price forecasting: recurrent networks, ARIMA and forecast combinations."""

__version__ = "0.1.0"
