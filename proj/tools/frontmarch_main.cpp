// Placeholder CLI entry point; filled in once the library modules exist.
int main() { return 0; }
