"""JumpEntropy library."""
