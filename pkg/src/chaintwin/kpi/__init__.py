from .reports import KpiReport, carbon_footprint, compute_kpis, kpi_series, nearest_rank

__all__ = ["KpiReport", "carbon_footprint", "compute_kpis", "kpi_series",
           "nearest_rank"]
