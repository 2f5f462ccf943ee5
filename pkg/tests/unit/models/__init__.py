"""Unit tests for models."""