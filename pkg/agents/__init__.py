"""Agentes do protocolo: vazamento, compressão, ruído, canal, ataque, métricas e experimento."""
