"""Unit tests for clients."""