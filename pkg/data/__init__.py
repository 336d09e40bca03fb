"""Tipos de traços (segredo, traço, conjunto, dataset) e persistência em arquivo."""
