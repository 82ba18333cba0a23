"""Optomechanical dynamics toolkit: simulation, steady states, stability and attractor analysis."""
