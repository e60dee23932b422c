"""Great-circle distances and a local planar projection."""

import numpy as np

EARTH_RADIUS_KM = 6371.0


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance between two (lat, lon) points in degrees."""
    lat1, lon1 = np.radians(a[0]), np.radians(a[1])
    lat2, lon2 = np.radians(b[0]), np.radians(b[1])
    h = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return float(2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0))))


def pairwise_haversine(coords: np.ndarray) -> np.ndarray:
    """Symmetric (n, n) distance matrix for an (n, 2) array of (lat, lon)."""
    coords = np.asarray(coords, dtype=float).reshape(-1, 2)
    lat = np.radians(coords[:, 0])[:, None]
    lon = np.radians(coords[:, 1])[:, None]
    h = np.sin((lat.T - lat) / 2) ** 2 + np.cos(lat) * np.cos(lat.T) * np.sin((lon.T - lon) / 2) ** 2
    d = 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))
    d = (d + d.T) / 2
    np.fill_diagonal(d, 0.0)
    return d


def project_km(coords: np.ndarray) -> np.ndarray:
    """Equirectangular projection around the mean latitude, in km."""
    coords = np.asarray(coords, dtype=float).reshape(-1, 2)
    if coords.shape[0] == 0:
        return coords.copy()
    lat0 = np.radians(coords[:, 0].mean())
    scale = EARTH_RADIUS_KM * np.pi / 180.0
    return np.column_stack([coords[:, 0] * scale, coords[:, 1] * scale * np.cos(lat0)])
