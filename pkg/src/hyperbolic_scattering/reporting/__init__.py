from hyperbolic_scattering.reporting.export import config_hash, dumps, write_csv, write_json, write_manifest

__all__ = ["config_hash", "dumps", "write_csv", "write_json", "write_manifest"]
