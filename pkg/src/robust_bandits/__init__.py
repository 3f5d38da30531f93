"""Distribution-oblivious robust UCB bandits: policies, bounds and a regret simulator."""

__version__ = "0.1.0"
