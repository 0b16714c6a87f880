"""Hierarchic high-order finite elements on triangles."""
