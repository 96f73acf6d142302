package walkthrough;

import java.io.IOException;
import java.nio.file.FileSystem;
import java.nio.file.InvalidPathException;
import java.nio.file.Path;

public class Example {

    private final FileSystem fs;

    public Example(FileSystem fs) {
        this.fs = fs;
    }

    public void A(String input) throws IOException {
        try {
            B(input);
        } catch (InvalidPathException e) {
            e.printStackTrace();
        }
    }

    public void B(String input) throws IOException {
        Path path = fs.getPath(input);
        C(path);
    }

    /**
     * Writes to the given path.
     *
     * @throws IOException when the channel fails
     */
    public void C(Path path) throws IOException {
        throw new IOException("cannot write " + path);
    }
}
