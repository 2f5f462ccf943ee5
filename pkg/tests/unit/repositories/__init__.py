"""Unit tests for repositories."""