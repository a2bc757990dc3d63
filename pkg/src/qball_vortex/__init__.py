"""Spinning Q-balls of the Klein-Gordon-Maxwell system on an axisymmetric grid."""
