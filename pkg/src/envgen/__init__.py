"""envgen: adaptive environment generation for training small RL agents.

A chat-completion LLM (or a deterministic scripted stand-in) writes
configurations for two grid-world games, a PPO agent trains in a mixture of
generated and original environments, and per-achievement feedback steers the
next round of generation.
"""

__version__ = "0.1.0"
