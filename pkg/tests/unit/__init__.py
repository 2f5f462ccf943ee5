"""Unit tests for OverPassAPI."""